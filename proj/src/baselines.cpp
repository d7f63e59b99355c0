#include "siren/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"
#include "siren/siren_core.hpp"

namespace siren {

std::string_view to_string(BaselineMethod method) noexcept {
    switch (method) {
        case BaselineMethod::M1: return "M1";
        case BaselineMethod::M2: return "M2";
        case BaselineMethod::M3: return "M3";
        case BaselineMethod::M4: return "M4";
        case BaselineMethod::ItemBootstrap: return "item-bootstrap";
    }
    return "unknown";
}

namespace {

std::vector<double> column_means(const Cell& cell) {
    std::vector<double> means(cell.shortlist_size());
    for (std::size_t k = 0; k < means.size(); ++k) means[k] = mean(cell.scoring().column(k));
    return means;
}

double winner_output(const Cell& cell, const Split& split) {
    if (split.score.empty() || split.eval.empty()) throw Error(ErrorCode::DegenerateSplit, "split has an empty fold");
    const std::size_t K = cell.shortlist_size();
    std::vector<double> s(K);
    for (std::size_t k = 0; k < K; ++k) s[k] = gathered_mean(cell.scoring().column(k), split.score);
    return gathered_mean(cell.held_out().column(argmax(s)), split.eval);
}

}  // namespace

double m1_naive_max(const ScoreTensor& tensor, const CellRef& ref) {
    const auto means = column_means(tensor.at(ref));
    if (means.empty()) throw Error(ErrorCode::InvalidArgument, "cell " + ref.label() + " has an empty shortlist");
    return *std::max_element(means.begin(), means.end());
}

WaldResult m2_wald(const ScoreTensor& tensor, const CellRef& ref, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const Cell& cell = tensor.at(ref);
    const auto means = column_means(cell);
    if (means.empty()) throw Error(ErrorCode::InvalidArgument, "cell " + ref.label() + " has an empty shortlist");
    const std::size_t k = argmax(means);
    const auto col = cell.scoring().column(k);
    const double M = static_cast<double>(col.size());
    const double z = normal_quantile(1.0 - alpha / 2.0);

    WaldResult out;
    out.estimate = means[k];
    out.binomial = std::all_of(col.begin(), col.end(), [](double v) { return v == 0.0 || v == 1.0; });
    const double se = out.binomial ? std::sqrt(out.estimate * (1.0 - out.estimate) / M) : sample_sd(col) / std::sqrt(M);
    out.degenerate_variance = se == 0.0;
    out.ci = {out.estimate - z * se, out.estimate + z * se};
    return out;
}

double m3_single_split(const ScoreTensor& tensor, const CellRef& ref, const Split& split) {
    const Cell& cell = tensor.at(ref);
    for (auto set : {&split.score, &split.eval})
        for (std::uint32_t i : *set)
            if (i >= tensor.item_count()) throw Error(ErrorCode::IndexOutOfRange, "split index outside the item pool");
    return winner_output(cell, split);
}

double m3_single_split(const ScoreTensor& tensor, const CellRef& ref, double rho, std::uint64_t seed) {
    const SplitDesign d = make_design(tensor.item_count(), 1, rho, WeightRule::Uniform, seed);
    return m3_single_split(tensor, ref, d.splits.front());
}

RepeatedArgmaxResult m4_repeated_argmax_t(const ScoreTensor& tensor, const CellRef& ref, std::size_t R, double rho,
                                          double alpha, std::uint64_t seed) {
    if (R < 2) throw Error(ErrorCode::InvalidArgument, "M4 needs at least two splits");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const Cell& cell = tensor.at(ref);
    const SplitDesign d = make_design(tensor.item_count(), R, rho, WeightRule::Uniform, seed);
    RepeatedArgmaxResult out;
    out.split_outputs.resize(R);
    for (std::size_t r = 0; r < R; ++r) out.split_outputs[r] = winner_output(cell, d.splits[r]);
    out.estimate = mean(out.split_outputs);
    const double half = student_t_quantile(1.0 - alpha / 2.0, static_cast<double>(R - 1)) *
                        sample_sd(out.split_outputs) / std::sqrt(static_cast<double>(R));
    out.ci = {out.estimate - half, out.estimate + half};
    return out;
}

ScoreTensor resample_items(const ScoreTensor& source, const std::vector<std::uint32_t>& idx) {
    const std::size_t M = idx.size();
    ScoreTensor t;
    t.items.resize(M);
    for (std::size_t i = 0; i < M; ++i) t.items[i] = source.items[idx[i]];
    t.budget_grid = source.budget_grid;
    t.cells.reserve(source.cells.size());
    auto gather = [&](const ScoreMatrix& z) {
        ScoreMatrix out(M, z.cols());
        for (std::size_t k = 0; k < z.cols(); ++k) {
            const auto src = z.column(k);
            auto dst = out.column(k);
            for (std::size_t i = 0; i < M; ++i) dst[i] = src[idx[i]];
        }
        return out;
    };
    for (const auto& cell : source.cells) {
        Cell c;
        c.system = cell.system;
        c.budget = cell.budget;
        c.artifacts = cell.artifacts;
        c.scores = gather(cell.scores);
        if (cell.eval_scores) c.eval_scores = gather(*cell.eval_scores);
        t.cells.push_back(std::move(c));
    }
    return t;
}

std::string_view to_string(ItemBootstrapCentering centering) noexcept {
    return centering == ItemBootstrapCentering::ReplicateMean ? "replicate-mean" : "estimate";
}

BaselineReport item_bootstrap(const ScoreTensor& tensor, const SplitDesign& design, const SelectorSpec& spec,
                              std::size_t n_resamples, double alpha, std::uint64_t seed,
                              ItemBootstrapCentering centering) {
    if (n_resamples == 0) throw Error(ErrorCode::InvalidArgument, "item bootstrap needs at least one resample");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    const std::size_t M = tensor.item_count();
    const SirenEstimate base = estimate(tensor, design, spec, {.influence = false});
    const std::size_t C = base.cells.size();

    // theta* per resample, resample-major.
    std::vector<double> replicates(n_resamples * C);
    const std::uint64_t key = derive_seed(seed, "item-bootstrap");
    parallel_for(n_resamples, [&](std::size_t begin, std::size_t end) {
        std::vector<std::uint32_t> idx(M);
        for (std::size_t b = begin; b < end; ++b) {
            CounterRng rng(key, b);
            for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(M));
            const ScoreTensor star = resample_items(tensor, idx);
            const SirenEstimate e = estimate(star, design, spec, {.influence = false});
            for (std::size_t c = 0; c < C; ++c) replicates[b * C + c] = e.cells[c].theta;
        }
    });

    BaselineReport rep;
    rep.method = BaselineMethod::ItemBootstrap;
    rep.design = {{"n_resamples", n_resamples}, {"alpha", alpha}, {"seed", seed}, {"design_seed", design.seed},
                  {"split_count", design.split_count()}, {"selector", selector_to_json(spec)},
                  {"centering", std::string(to_string(centering))}};
    std::vector<double> dev(n_resamples);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t b = 0; b < n_resamples; ++b) dev[b] = replicates[b * C + c];
        const double centre =
            centering == ItemBootstrapCentering::ReplicateMean ? mean(dev) : base.cells[c].theta;
        for (auto& v : dev) v = std::abs(v - centre);
        const double half = upper_quantile(dev, 1.0 - alpha);
        BaselineCell bc;
        bc.system = base.cells[c].system;
        bc.budget = base.cells[c].budget;
        bc.estimate = base.cells[c].theta;
        bc.ci = Interval{bc.estimate - half, bc.estimate + half};
        rep.cells.push_back(std::move(bc));
    }
    return rep;
}

nlohmann::ordered_json baseline_to_json(const BaselineReport& report) {
    nlohmann::ordered_json doc;
    doc["method"] = std::string(to_string(report.method));
    doc["design"] = report.design;
    doc["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json jc;
        jc["system"] = c.system;
        jc["budget"] = c.budget;
        jc["estimate"] = c.estimate;
        if (c.ci) {
            jc["lo"] = c.ci->lo;
            jc["hi"] = c.ci->hi;
        }
        if (c.degenerate_variance) jc["degenerate_variance"] = true;
        doc["cells"].push_back(std::move(jc));
    }
    return doc;
}

}  // namespace siren
