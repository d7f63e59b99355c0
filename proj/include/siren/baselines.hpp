#pragma once

// Winner-based reporting baselines and the nonparametric item bootstrap.
//
//   M1  naive max: best full-pool column mean
//   M2  M1 with a Wald interval on the same items
//   M3  single split: winner on one fold, reported on the other
//   M4  R splits of M3 with a Student-t interval across splits

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "siren/bootstrap_engine.hpp"
#include "siren/score_store.hpp"
#include "siren/selector.hpp"
#include "siren/split_engine.hpp"

namespace siren {

enum class BaselineMethod { M1, M2, M3, M4, ItemBootstrap };

std::string_view to_string(BaselineMethod method) noexcept;

struct BaselineCell {
    std::string system;
    std::string budget;
    double estimate = 0.0;
    std::optional<Interval> ci;
    bool degenerate_variance = false;
};

struct BaselineReport {
    BaselineMethod method = BaselineMethod::M1;
    std::vector<BaselineCell> cells;
    nlohmann::ordered_json design;   // folds, seeds and settings used
};

double m1_naive_max(const ScoreTensor& tensor, const CellRef& cell);

struct WaldResult {
    double estimate = 0.0;
    Interval ci;
    bool degenerate_variance = false;   // p in {0, 1}: zero-width interval
    bool binomial = true;               // false when scores are not all 0/1
};

// Binomial Wald p +- z sqrt(p(1-p)/M) for 0/1 scores, otherwise
// mean +- z sd/sqrt(M) with the sample sd of the winning column.
WaldResult m2_wald(const ScoreTensor& tensor, const CellRef& cell, double alpha);

// Winner by scoring-fold mean (lowest index on ties), reported on the other fold.
double m3_single_split(const ScoreTensor& tensor, const CellRef& cell, const Split& split);
// Uses split 0 of make_design(M, 1, rho, uniform, seed); throws DegenerateSplit.
double m3_single_split(const ScoreTensor& tensor, const CellRef& cell, double rho, std::uint64_t seed);

struct RepeatedArgmaxResult {
    double estimate = 0.0;
    Interval ci;
    std::vector<double> split_outputs;
};

// Fresh splits make_design(M, R, rho, uniform, seed); requires R >= 2.
RepeatedArgmaxResult m4_repeated_argmax_t(const ScoreTensor& tensor, const CellRef& cell, std::size_t R, double rho,
                                          double alpha, std::uint64_t seed);

// Where the |theta* - centre| deviations are measured from. Resampled
// duplicates can land in both folds of a split, which shifts theta* upward;
// ReplicateMean removes that shift, Estimate keeps it.
enum class ItemBootstrapCentering { ReplicateMean, Estimate };

std::string_view to_string(ItemBootstrapCentering centering) noexcept;

// Resamples items with replacement and reruns the repeated-split estimator on
// each resampled tensor with the same split index structure. Intervals are
// symmetric around theta: theta +- q_{1-alpha}(|theta* - centre|).
// Resample b uses substream (seed, b).

BaselineReport item_bootstrap(const ScoreTensor& tensor, const SplitDesign& design, const SelectorSpec& spec,
                              std::size_t n_resamples, double alpha, std::uint64_t seed,
                              ItemBootstrapCentering centering = ItemBootstrapCentering::ReplicateMean);

// Rows of `source` in the order given by idx (length M).
ScoreTensor resample_items(const ScoreTensor& source, const std::vector<std::uint32_t>& idx);

nlohmann::ordered_json baseline_to_json(const BaselineReport& report);

}  // namespace siren
