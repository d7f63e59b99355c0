#pragma once

// Repeated-split estimator and its plug-in item-level influence contributions.
//
// Per split r and cell: scoring-set means S, held-out means T, weights
// q = g(S), split output Y = q'T. The estimate is theta = sum_r w_r Y_r and
// the influence contribution of item i is
//
//   psi_i = sum_r w_r [ q' GT_ir + T' Dg(S) GS_ir ]
//   GS_irk = (M/m) 1{i in D_r} (Z_ik - S_k)
//   GT_irk = (M/l) 1{i in E_r} (Z_ik - T_k)
//
// Each residual block is centred at its own empirical mean, so the psi
// vector of every cell sums to zero.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "siren/score_store.hpp"
#include "siren/selector.hpp"
#include "siren/split_engine.hpp"

namespace siren {

struct SplitScores {
    std::vector<double> s_hat;
    std::vector<double> t_hat;
    std::vector<double> q_hat;
    double y_hat = 0.0;
};

// Throws IndexOutOfRange when a design index is outside the item pool.
std::vector<SplitScores> split_scores(const ScoreTensor& tensor, const SplitDesign& design, const CellRef& cell,
                                      const SelectorSpec& spec);

// Fraction of splits whose scoring-set argmax differs from the most frequent
// argmax (ties to the lowest artifact index).
double winner_instability(const ScoreTensor& tensor, const SplitDesign& design, const CellRef& cell);
double instability_of(const std::vector<std::size_t>& winners, std::size_t shortlist_size);

struct CellEstimate {
    std::string system;
    std::string budget;
    double theta = 0.0;
    std::vector<double> psi;   // M entries; empty when influence was not requested
    SelectorKind resolved = SelectorKind::Softmax;
    double pi_win = 0.0;

    CellRef ref() const { return {system, budget}; }
};

struct SirenEstimate {
    std::size_t item_count = 0;
    SelectorSpec selector;           // as requested; per-cell resolution in cells[c].resolved
    std::uint64_t design_seed = 0;
    std::size_t split_count = 0;
    std::vector<CellEstimate> cells;

    bool has_influence() const noexcept;
    std::size_t index_of(const CellRef& ref) const;  // throws UnknownCell
};

struct EstimateOptions {
    bool influence = true;
};

// Cells are computed independently (in parallel when threads are enabled);
// output is bitwise identical for any thread count.
SirenEstimate estimate(const ScoreTensor& tensor, const SplitDesign& design, const SelectorSpec& spec,
                       EstimateOptions options = {});

nlohmann::ordered_json estimate_to_json(const SirenEstimate& est, bool include_psi);

}  // namespace siren
