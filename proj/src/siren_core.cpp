#include "siren/siren_core.hpp"

#include <algorithm>

#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"

namespace siren {

namespace {

void check_indices(const SplitDesign& design, std::size_t M) {
    if (design.splits.empty()) throw Error(ErrorCode::InvalidArgument, "split design has no splits");
    if (design.weights.size() != design.splits.size())
        throw Error(ErrorCode::InvalidArgument, "split design weight count differs from split count");
    for (std::size_t r = 0; r < design.splits.size(); ++r) {
        const Split& s = design.splits[r];
        if (s.score.empty() || s.eval.empty())
            throw Error(ErrorCode::DegenerateSplit, "split " + std::to_string(r) + " has an empty fold");
        for (auto set : {&s.score, &s.eval})
            for (std::uint32_t i : *set)
                if (i >= M)
                    throw Error(ErrorCode::IndexOutOfRange, "split " + std::to_string(r) + " references item " +
                                                                std::to_string(i) + " of " + std::to_string(M));
    }
}

// Scoring- and held-out means per split, stored r-major (R x K).
struct FoldMeans {
    std::size_t K = 0;
    std::vector<double> s;
    std::vector<double> t;

    std::span<const double> s_row(std::size_t r) const { return {s.data() + r * K, K}; }
    std::span<const double> t_row(std::size_t r) const { return {t.data() + r * K, K}; }
};

FoldMeans fold_means(const Cell& cell, const SplitDesign& design) {
    FoldMeans fm;
    fm.K = cell.shortlist_size();
    const std::size_t R = design.split_count();
    fm.s.resize(R * fm.K);
    fm.t.resize(R * fm.K);
    for (std::size_t r = 0; r < R; ++r) {
        const Split& sp = design.splits[r];
        for (std::size_t k = 0; k < fm.K; ++k) {
            fm.s[r * fm.K + k] = gathered_mean(cell.scoring().column(k), sp.score);
            fm.t[r * fm.K + k] = gathered_mean(cell.held_out().column(k), sp.eval);
        }
    }
    return fm;
}

std::size_t majority(const std::vector<std::size_t>& winners, std::size_t K) {
    std::vector<std::size_t> counts(std::max<std::size_t>(K, 1), 0);
    for (std::size_t w : winners) ++counts[w];
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

CellEstimate estimate_cell(const Cell& cell, const SplitDesign& design, const SelectorSpec& spec, bool influence,
                           std::size_t M) {
    if (cell.shortlist_size() == 0)
        throw Error(ErrorCode::InvalidArgument, "cell " + cell.ref().label() + " has an empty shortlist");
    const std::size_t K = cell.shortlist_size();
    const std::size_t R = design.split_count();
    const FoldMeans fm = fold_means(cell, design);

    CellEstimate out;
    out.system = cell.system;
    out.budget = cell.budget;

    std::vector<std::size_t> winners(R);
    for (std::size_t r = 0; r < R; ++r) winners[r] = argmax(fm.s_row(r));
    out.pi_win = instability_of(winners, K);
    const SelectorSpec concrete = resolve(spec, out.pi_win);
    out.resolved = concrete.kind;

    std::vector<double> q(K);
    std::vector<double> coef(K);
    if (influence) out.psi.assign(M, 0.0);
    const double Md = static_cast<double>(M);

    for (std::size_t r = 0; r < R; ++r) {
        const auto S = fm.s_row(r);
        const auto T = fm.t_row(r);
        select_into(concrete, S, q);
        double y = 0.0;
        for (std::size_t k = 0; k < K; ++k) y += q[k] * T[k];
        out.theta += design.weights[r] * y;

        if (!influence) continue;
        const Split& sp = design.splits[r];
        const double w = design.weights[r];

        // Held-out term: w (M/l) sum_k q_k (Z_ik - T_k) for i in E_r.
        const double held_scale = w * Md / static_cast<double>(sp.eval.size());
        for (std::size_t k = 0; k < K; ++k) {
            const double c = held_scale * q[k];
            if (c == 0.0) continue;
            const auto z = cell.held_out().column(k);
            for (std::uint32_t i : sp.eval) out.psi[i] += c * (z[i] - T[k]);
        }

        // Selection term: w (M/m) (Dg(S)' T)' (Z_i - S) for i in D_r.
        if (concrete.kind == SelectorKind::Hard) continue;
        const auto J = jacobian(concrete, S);
        for (std::size_t b = 0; b < K; ++b) {
            double acc = 0.0;
            for (std::size_t a = 0; a < K; ++a) acc += T[a] * J[a * K + b];
            coef[b] = acc;
        }
        const double score_scale = w * Md / static_cast<double>(sp.score.size());
        for (std::size_t k = 0; k < K; ++k) {
            const double c = score_scale * coef[k];
            if (c == 0.0) continue;
            const auto z = cell.scoring().column(k);
            for (std::uint32_t i : sp.score) out.psi[i] += c * (z[i] - S[k]);
        }
    }
    return out;
}

}  // namespace

double instability_of(const std::vector<std::size_t>& winners, std::size_t shortlist_size) {
    if (winners.empty()) return 0.0;
    const std::size_t top = majority(winners, shortlist_size);
    const auto disagree = std::count_if(winners.begin(), winners.end(), [&](std::size_t w) { return w != top; });
    return static_cast<double>(disagree) / static_cast<double>(winners.size());
}

std::vector<SplitScores> split_scores(const ScoreTensor& tensor, const SplitDesign& design, const CellRef& ref,
                                      const SelectorSpec& spec) {
    check_selector(spec);
    const Cell& cell = tensor.at(ref);
    check_indices(design, tensor.item_count());
    const FoldMeans fm = fold_means(cell, design);
    const std::size_t K = cell.shortlist_size();

    SelectorSpec concrete = spec;
    if (spec.kind == SelectorKind::Adaptive) concrete = resolve(spec, winner_instability(tensor, design, ref));

    std::vector<SplitScores> out(design.split_count());
    for (std::size_t r = 0; r < design.split_count(); ++r) {
        SplitScores& ss = out[r];
        ss.s_hat.assign(fm.s_row(r).begin(), fm.s_row(r).end());
        ss.t_hat.assign(fm.t_row(r).begin(), fm.t_row(r).end());
        ss.q_hat = select(concrete, ss.s_hat);
        for (std::size_t k = 0; k < K; ++k) ss.y_hat += ss.q_hat[k] * ss.t_hat[k];
    }
    return out;
}

double winner_instability(const ScoreTensor& tensor, const SplitDesign& design, const CellRef& ref) {
    const Cell& cell = tensor.at(ref);
    check_indices(design, tensor.item_count());
    const FoldMeans fm = fold_means(cell, design);
    std::vector<std::size_t> winners(design.split_count());
    for (std::size_t r = 0; r < winners.size(); ++r) winners[r] = argmax(fm.s_row(r));
    return instability_of(winners, cell.shortlist_size());
}

bool SirenEstimate::has_influence() const noexcept {
    return std::all_of(cells.begin(), cells.end(), [&](const CellEstimate& c) { return c.psi.size() == item_count; });
}

std::size_t SirenEstimate::index_of(const CellRef& ref) const {
    for (std::size_t c = 0; c < cells.size(); ++c)
        if (cells[c].system == ref.system && cells[c].budget == ref.budget) return c;
    throw Error(ErrorCode::UnknownCell, "no cell " + ref.label() + " in estimate");
}

SirenEstimate estimate(const ScoreTensor& tensor, const SplitDesign& design, const SelectorSpec& spec,
                       EstimateOptions options) {
    check_selector(spec);
    const std::size_t M = tensor.item_count();
    check_indices(design, M);

    SirenEstimate est;
    est.item_count = M;
    est.selector = spec;
    est.design_seed = design.seed;
    est.split_count = design.split_count();
    est.cells.resize(tensor.cells.size());
    parallel_for(tensor.cells.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c)
            est.cells[c] = estimate_cell(tensor.cells[c], design, spec, options.influence, M);
    });
    return est;
}

nlohmann::ordered_json estimate_to_json(const SirenEstimate& est, bool include_psi) {
    nlohmann::ordered_json doc;
    doc["item_count"] = est.item_count;
    doc["selector"] = selector_to_json(est.selector);
    doc["design_seed"] = est.design_seed;
    doc["split_count"] = est.split_count;
    doc["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : est.cells) {
        nlohmann::ordered_json jc;
        jc["system"] = c.system;
        jc["budget"] = c.budget;
        jc["theta"] = c.theta;
        jc["resolved_selector"] = std::string(to_string(c.resolved));
        jc["pi_win"] = c.pi_win;
        if (include_psi) jc["psi"] = c.psi;
        doc["cells"].push_back(std::move(jc));
    }
    return doc;
}

}  // namespace siren
