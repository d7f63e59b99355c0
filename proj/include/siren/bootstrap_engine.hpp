#pragma once

// Gaussian multiplier bootstrap over the full (system, budget) grid.
//
// Draw b samples one multiplier zeta_i ~ N(0, 1) per item and reuses it in
// every cell: G*_c = M^{-1/2} sum_i zeta_i (psi_ic - mean_c psi). Intervals
// are symmetric around theta with half-widths taken from nearest-rank upper
// quantiles of |G*| (pointwise) or max_c |G*_c| (simultaneous band).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "siren/score_store.hpp"
#include "siren/siren_core.hpp"

namespace siren {

struct BootstrapConfig {
    std::size_t n_draws = 2000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
};

// Throws InvalidArgument for n_draws = 0 or alpha outside (0, 1). Returns a
// warning (empty when none) for n_draws below 100.
std::string check_bootstrap_config(const BootstrapConfig& cfg);

class DrawMatrix {
public:
    DrawMatrix() = default;
    DrawMatrix(std::size_t draws, std::size_t cells) : draws_(draws), cells_(cells), values_(draws * cells, 0.0) {}

    std::size_t draws() const noexcept { return draws_; }
    std::size_t cells() const noexcept { return cells_; }

    double& operator()(std::size_t b, std::size_t c) noexcept { return values_[b * cells_ + c]; }
    double operator()(std::size_t b, std::size_t c) const noexcept { return values_[b * cells_ + c]; }
    std::span<const double> row(std::size_t b) const noexcept { return {values_.data() + b * cells_, cells_}; }
    std::vector<double> column(std::size_t c) const;

    friend bool operator==(const DrawMatrix&, const DrawMatrix&) = default;

private:
    std::size_t draws_ = 0;
    std::size_t cells_ = 0;
    std::vector<double> values_;
};

// Multipliers for draw b come from substream (seed, b), so the result does
// not depend on the thread count. Throws MissingInfluence if any cell lacks psi.
DrawMatrix multiplier_draws(const SirenEstimate& est, const BootstrapConfig& cfg);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    double half_width() const noexcept { return 0.5 * (hi - lo); }
    bool contains(double x) const noexcept { return lo <= x && x <= hi; }
};

struct CellInterval {
    std::string system;
    std::string budget;
    double theta = 0.0;
    Interval pointwise;
    Interval band;
    double draw_sd = 0.0;   // empirical sd of the G* draws
};

struct ContrastTerm {
    CellRef cell;
    double coef = 0.0;
};

struct ContrastSpec {
    std::vector<ContrastTerm> terms;
};

// Parses "system:budget:coef"; the budget may itself contain ':' only if the
// system does not.
ContrastTerm parse_contrast_term(std::string_view text);

struct ContrastResult {
    ContrastSpec spec;
    double estimate = 0.0;
    Interval ci;
};

struct BootstrapResult {
    std::vector<CellInterval> cells;
    std::vector<ContrastResult> contrasts;
    double band_quantile = 0.0;   // q_{1-alpha}(max_c |G*_c|)
    std::size_t item_count = 0;
    std::size_t n_draws = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;

    static constexpr const char* kQuantileRule = "nearest-rank-upper";
    static constexpr const char* kIntervalType = "symmetric-abs";
};

BootstrapResult intervals(const SirenEstimate& est, const DrawMatrix& draws, const BootstrapConfig& cfg);

// Throws UnknownCell if a term names a cell outside the estimate and
// InvalidArgument if every coefficient is zero.
ContrastResult contrast_ci(const SirenEstimate& est, const DrawMatrix& draws, const ContrastSpec& spec,
                           const BootstrapConfig& cfg);

nlohmann::ordered_json bootstrap_to_json(const BootstrapResult& result);
nlohmann::ordered_json contrast_to_json(const ContrastResult& result);

}  // namespace siren
