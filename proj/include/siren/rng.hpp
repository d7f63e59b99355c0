#pragma once

// Counter-based random streams.
//
// Every random quantity in the library is addressed by (key, stream, counter):
// the key comes from a master seed plus a text label, the stream is a
// substream index (split r, bootstrap draw b, trial t, ...), and the counter
// walks through Philox blocks. Output for substream b never depends on how
// many substreams were consumed before it, so work can be spread over
// threads without changing results.

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace siren {

// Philox4x32-10 block function (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for a labelled consumer of the master seed, e.g.
// derive_seed(seed, "design") or derive_seed(seed, "study-a/trial", t).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index = 0) noexcept;

class CounterRng {
public:
    using result_type = std::uint32_t;

    CounterRng(std::uint64_t key, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (next_ == kWords) refill();
        return out_[next_++];
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;

    // Uniform integer on [0, n); n must be in [1, 2^32].
    std::uint64_t below(std::uint64_t n) noexcept;

    // Uniform 64-bit word from two 32-bit outputs.
    std::uint64_t next64() noexcept;

    // Standard normal, 128-layer ziggurat (Marsaglia & Tsang) on one 32-bit
    // word: 7 bits pick the layer, 1 bit the sign, 24 bits the magnitude.
    double normal() noexcept;

private:
    void refill() noexcept;

    // Several consecutive blocks are generated per refill so their rounds
    // overlap; the word sequence is the same as one block at a time.
    static constexpr unsigned kBlocks = 8;
    static constexpr unsigned kWords = 4 * kBlocks;

    Philox4x32::Key key_{};
    Philox4x32::Counter ctr_{};
    std::array<std::uint32_t, kWords> out_{};
    unsigned next_ = kWords;
};

}  // namespace siren
