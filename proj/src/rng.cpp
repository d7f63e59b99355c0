#include "siren/rng.hpp"

#include <bit>
#include <cmath>

#if defined(__SSE2__)
#include <emmintrin.h>
#endif

namespace siren {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view label,
                          std::uint64_t index) noexcept {
    // FNV-1a over the label, then mixed with seed and index.
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return splitmix64(splitmix64(seed ^ h) + splitmix64(index ^ 0x5851F42D4C957F2Dull));
}

CounterRng::CounterRng(std::uint64_t key, std::uint64_t stream) noexcept {
    key_ = {static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)};
    ctr_ = {0u, 0u, static_cast<std::uint32_t>(stream),
            static_cast<std::uint32_t>(stream >> 32)};
}

void CounterRng::refill() noexcept {
    std::uint32_t c0[kBlocks], c1[kBlocks], c2[kBlocks], c3[kBlocks];
    for (unsigned j = 0; j < kBlocks; ++j) {
        c0[j] = ctr_[0];
        c1[j] = ctr_[1];
        c2[j] = ctr_[2];
        c3[j] = ctr_[3];
        if (++ctr_[0] == 0) ++ctr_[1];
    }
    std::uint32_t k0 = key_[0], k1 = key_[1];
#if defined(__SSE2__)
    // Four blocks per vector, two vectors interleaved. _mm_mul_epu32 only
    // multiplies the even lanes, so the odd lanes go through a shifted copy.
    static_assert(kBlocks == 8);
    const __m128i m0 = _mm_set1_epi32(static_cast<int>(kMul0));
    const __m128i m1 = _mm_set1_epi32(static_cast<int>(kMul1));
    const __m128i even = _mm_set_epi32(0, -1, 0, -1);
    auto load = [](const std::uint32_t* p) { return _mm_loadu_si128(reinterpret_cast<const __m128i*>(p)); };
    auto store = [](std::uint32_t* p, __m128i v) { _mm_storeu_si128(reinterpret_cast<__m128i*>(p), v); };
    // (hi, lo) halves of x * m for all four lanes.
    auto mul = [&](__m128i x, __m128i m, __m128i& hi, __m128i& lo) {
        const __m128i pe = _mm_mul_epu32(x, m);
        const __m128i po = _mm_mul_epu32(_mm_srli_epi64(x, 32), m);
        lo = _mm_or_si128(_mm_and_si128(pe, even), _mm_slli_epi64(po, 32));
        hi = _mm_or_si128(_mm_srli_epi64(pe, 32), _mm_andnot_si128(even, po));
    };
    __m128i a0 = load(c0), a1 = load(c1), a2 = load(c2), a3 = load(c3);
    __m128i b0 = load(c0 + 4), b1 = load(c1 + 4), b2 = load(c2 + 4), b3 = load(c3 + 4);
    for (int round = 0; round < 10; ++round) {
        const __m128i kx = _mm_set1_epi32(static_cast<int>(k0));
        const __m128i ky = _mm_set1_epi32(static_cast<int>(k1));
        __m128i ah0, al0, ah1, al1, bh0, bl0, bh1, bl1;
        mul(a0, m0, ah0, al0);
        mul(b0, m0, bh0, bl0);
        mul(a2, m1, ah1, al1);
        mul(b2, m1, bh1, bl1);
        a0 = _mm_xor_si128(_mm_xor_si128(ah1, a1), kx);
        b0 = _mm_xor_si128(_mm_xor_si128(bh1, b1), kx);
        a2 = _mm_xor_si128(_mm_xor_si128(ah0, a3), ky);
        b2 = _mm_xor_si128(_mm_xor_si128(bh0, b3), ky);
        a1 = al1;
        b1 = bl1;
        a3 = al0;
        b3 = bl0;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    store(c0, a0), store(c1, a1), store(c2, a2), store(c3, a3);
    store(c0 + 4, b0), store(c1 + 4, b1), store(c2 + 4, b2), store(c3 + 4, b3);
#else
    for (int round = 0; round < 10; ++round) {
        for (unsigned j = 0; j < kBlocks; ++j) {
            std::uint32_t hi0, lo0, hi1, lo1;
            mulhilo(kMul0, c0[j], hi0, lo0);
            mulhilo(kMul1, c2[j], hi1, lo1);
            c0[j] = hi1 ^ c1[j] ^ k0;
            c1[j] = lo1;
            c2[j] = hi0 ^ c3[j] ^ k1;
            c3[j] = lo0;
        }
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
#endif
    for (unsigned j = 0; j < kBlocks; ++j) {
        out_[4 * j] = c0[j];
        out_[4 * j + 1] = c1[j];
        out_[4 * j + 2] = c2[j];
        out_[4 * j + 3] = c3[j];
    }
    next_ = 0;
}

double CounterRng::uniform() noexcept {
    const std::uint64_t a = (*this)() >> 5;
    const std::uint64_t b = (*this)() >> 6;
    return static_cast<double>((a << 26) | b) * 0x1.0p-53;
}

std::uint64_t CounterRng::below(std::uint64_t n) noexcept {
    if (n > 0xFFFFFFFFull) {
        // Only reachable for n == 2^32.
        return (*this)();
    }
    // Lemire's nearly-divisionless bounded integer.
    const auto bound = static_cast<std::uint32_t>(n);
    std::uint64_t m = static_cast<std::uint64_t>((*this)()) * bound;
    auto low = static_cast<std::uint32_t>(m);
    if (low < bound) {
        const std::uint32_t threshold = (0u - bound) % bound;
        while (low < threshold) {
            m = static_cast<std::uint64_t>((*this)()) * bound;
            low = static_cast<std::uint32_t>(m);
        }
    }
    return m >> 32;
}

std::uint64_t CounterRng::next64() noexcept {
    if (next_ + 2 > kWords) {
        const std::uint64_t hi = (*this)();
        return (hi << 32) | (*this)();
    }
    const std::uint64_t hi = out_[next_];
    const std::uint64_t lo = out_[next_ + 1];
    next_ += 2;
    return (hi << 32) | lo;
}

namespace {

// Layer edges x_i, densities f(x_i) and quick-accept thresholds for a
// 128-layer ziggurat; layer 0 is the base strip plus the tail beyond r.
struct ZigguratTables {
    static constexpr int kLayers = 128;
    static constexpr double kTail = 3.442619855899;          // r
    static constexpr double kArea = 9.91256303526217e-3;     // v, area of each layer
    static constexpr double kScale = 16777216.0;             // 2^24

    std::array<std::uint32_t, kLayers> k{};
    std::array<double, kLayers> w{};
    std::array<double, kLayers> f{};

    ZigguratTables() {
        double dn = kTail, tn = dn;
        const double q = kArea / std::exp(-0.5 * dn * dn);
        k[0] = static_cast<std::uint32_t>((dn / q) * kScale);
        k[1] = 0;
        w[0] = q / kScale;
        w[kLayers - 1] = dn / kScale;
        f[0] = 1.0;
        f[kLayers - 1] = std::exp(-0.5 * dn * dn);
        for (int i = kLayers - 2; i >= 1; --i) {
            dn = std::sqrt(-2.0 * std::log(kArea / dn + std::exp(-0.5 * dn * dn)));
            k[i + 1] = static_cast<std::uint32_t>((dn / tn) * kScale);
            tn = dn;
            f[i] = std::exp(-0.5 * dn * dn);
            w[i] = dn / kScale;
        }
    }
};

const ZigguratTables& ziggurat() {
    static const ZigguratTables tables;
    return tables;
}

}  // namespace

double CounterRng::normal() noexcept {
    const ZigguratTables& z = ziggurat();
    for (;;) {
        const std::uint32_t u = (*this)();
        const auto layer = static_cast<int>(u & 0x7F);
        const std::uint64_t negative = (u >> 7) & 1u;
        const std::uint32_t mag = u >> 8;
        // Sign applied through the bit pattern; a branch here mispredicts half the time.
        double x = static_cast<double>(mag) * z.w[layer];
        x = std::bit_cast<double>(std::bit_cast<std::uint64_t>(x) | (negative << 63));
        if (mag < z.k[layer]) return x;
        if (layer == 0) {
            // Tail beyond r, Marsaglia's exponential rejection.
            for (;;) {
                const double xx = -std::log1p(-uniform()) / ZigguratTables::kTail;
                const double yy = -std::log1p(-uniform());
                if (yy + yy > xx * xx) return negative ? -(ZigguratTables::kTail + xx) : ZigguratTables::kTail + xx;
            }
        }
        if ((z.f[layer - 1] - z.f[layer]) * uniform() + z.f[layer] < std::exp(-0.5 * x * x)) return x;
    }
}

}  // namespace siren
