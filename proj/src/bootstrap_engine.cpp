#include "siren/bootstrap_engine.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"

namespace siren {

std::string check_bootstrap_config(const BootstrapConfig& cfg) {
    if (cfg.n_draws == 0) throw Error(ErrorCode::InvalidArgument, "bootstrap needs at least one draw");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    if (cfg.n_draws < 100)
        return "only " + std::to_string(cfg.n_draws) + " bootstrap draws; quantiles will be coarse";
    return {};
}

std::vector<double> DrawMatrix::column(std::size_t c) const {
    std::vector<double> out(draws_);
    for (std::size_t b = 0; b < draws_; ++b) out[b] = (*this)(b, c);
    return out;
}

DrawMatrix multiplier_draws(const SirenEstimate& est, const BootstrapConfig& cfg) {
    check_bootstrap_config(cfg);
    const std::size_t M = est.item_count;
    const std::size_t C = est.cells.size();
    for (const auto& c : est.cells)
        if (c.psi.size() != M)
            throw Error(ErrorCode::MissingInfluence, "cell " + c.ref().label() + " has no influence contributions");

    // Centred contributions, one contiguous row per cell.
    std::vector<double> centred(C * M);
    for (std::size_t c = 0; c < C; ++c) {
        const double bar = mean(est.cells[c].psi);
        for (std::size_t i = 0; i < M; ++i) centred[c * M + i] = est.cells[c].psi[i] - bar;
    }

    DrawMatrix out(cfg.n_draws, C);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    const std::uint64_t key = derive_seed(cfg.seed, "multiplier");
    parallel_for(cfg.n_draws, [&](std::size_t begin, std::size_t end) {
        std::vector<double> zeta(M);
        for (std::size_t b = begin; b < end; ++b) {
            CounterRng rng(key, b);
            for (auto& z : zeta) z = rng.normal();
            for (std::size_t c = 0; c < C; ++c) {
                const double* row = centred.data() + c * M;
                // Four independent partial sums, combined in a fixed order.
                double acc[4] = {0.0, 0.0, 0.0, 0.0};
                std::size_t i = 0;
                for (; i + 4 <= M; i += 4)
                    for (std::size_t l = 0; l < 4; ++l) acc[l] += zeta[i + l] * row[i + l];
                for (; i < M; ++i) acc[0] += zeta[i] * row[i];
                out(b, c) = ((acc[0] + acc[1]) + (acc[2] + acc[3])) * scale;
            }
        }
    });
    return out;
}

namespace {

void check_draws(const SirenEstimate& est, const DrawMatrix& draws) {
    if (draws.cells() != est.cells.size())
        throw Error(ErrorCode::MismatchedCells, "draw matrix has " + std::to_string(draws.cells()) +
                                                    " cells, estimate has " + std::to_string(est.cells.size()));
    if (draws.draws() == 0) throw Error(ErrorCode::InvalidArgument, "draw matrix is empty");
}

}  // namespace

BootstrapResult intervals(const SirenEstimate& est, const DrawMatrix& draws, const BootstrapConfig& cfg) {
    check_draws(est, draws);
    BootstrapResult res;
    if (auto w = check_bootstrap_config(cfg); !w.empty()) res.warnings.push_back(w);
    res.item_count = est.item_count;
    res.n_draws = draws.draws();
    res.alpha = cfg.alpha;
    res.seed = cfg.seed;

    const double root_m = std::sqrt(static_cast<double>(est.item_count));
    const std::size_t C = est.cells.size();
    const std::size_t B = draws.draws();

    std::vector<double> max_abs(B, 0.0);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t c = 0; c < C; ++c) max_abs[b] = std::max(max_abs[b], std::abs(draws(b, c)));
    res.band_quantile = C > 0 ? upper_quantile(max_abs, 1.0 - cfg.alpha) : 0.0;

    for (std::size_t c = 0; c < C; ++c) {
        std::vector<double> g = draws.column(c);
        CellInterval ci;
        ci.system = est.cells[c].system;
        ci.budget = est.cells[c].budget;
        ci.theta = est.cells[c].theta;
        ci.draw_sd = sample_sd(g);
        for (auto& v : g) v = std::abs(v);
        const double q = upper_quantile(g, 1.0 - cfg.alpha);
        if (q > res.band_quantile)
            throw Error(ErrorCode::InvalidArgument, "internal: pointwise quantile exceeds the max-statistic quantile");
        ci.pointwise = {ci.theta - q / root_m, ci.theta + q / root_m};
        ci.band = {ci.theta - res.band_quantile / root_m, ci.theta + res.band_quantile / root_m};
        res.cells.push_back(std::move(ci));
    }
    return res;
}

ContrastResult contrast_ci(const SirenEstimate& est, const DrawMatrix& draws, const ContrastSpec& spec,
                           const BootstrapConfig& cfg) {
    check_draws(est, draws);
    check_bootstrap_config(cfg);
    if (spec.terms.empty() ||
        std::all_of(spec.terms.begin(), spec.terms.end(), [](const ContrastTerm& t) { return t.coef == 0.0; }))
        throw Error(ErrorCode::InvalidArgument, "contrast needs at least one nonzero coefficient");

    std::vector<double> coef(est.cells.size(), 0.0);
    for (const auto& term : spec.terms) {
        if (!std::isfinite(term.coef)) throw Error(ErrorCode::InvalidArgument, "contrast coefficient is not finite");
        coef[est.index_of(term.cell)] += term.coef;
    }

    ContrastResult out;
    out.spec = spec;
    for (std::size_t c = 0; c < coef.size(); ++c) out.estimate += coef[c] * est.cells[c].theta;

    std::vector<double> g(draws.draws());
    for (std::size_t b = 0; b < draws.draws(); ++b) {
        double acc = 0.0;
        for (std::size_t c = 0; c < coef.size(); ++c) acc += coef[c] * draws(b, c);
        g[b] = std::abs(acc);
    }
    const double half = upper_quantile(g, 1.0 - cfg.alpha) / std::sqrt(static_cast<double>(est.item_count));
    out.ci = {out.estimate - half, out.estimate + half};
    return out;
}

ContrastTerm parse_contrast_term(std::string_view text) {
    const auto last = text.rfind(':');
    const auto first = text.find(':');
    if (last == std::string_view::npos || first == last)
        throw Error(ErrorCode::InvalidArgument, "contrast term '" + std::string(text) + "' is not system:budget:coef");
    ContrastTerm t;
    t.cell.system = std::string(text.substr(0, first));
    t.cell.budget = std::string(text.substr(first + 1, last - first - 1));
    std::string_view num = text.substr(last + 1);
    if (!num.empty() && num.front() == '+') num.remove_prefix(1);
    auto res = std::from_chars(num.data(), num.data() + num.size(), t.coef);
    if (res.ec != std::errc() || res.ptr != num.data() + num.size() || t.cell.system.empty() || t.cell.budget.empty())
        throw Error(ErrorCode::InvalidArgument, "contrast term '" + std::string(text) + "' is not system:budget:coef");
    return t;
}

nlohmann::ordered_json contrast_to_json(const ContrastResult& r) {
    nlohmann::ordered_json doc;
    doc["terms"] = nlohmann::ordered_json::array();
    for (const auto& t : r.spec.terms)
        doc["terms"].push_back({{"system", t.cell.system}, {"budget", t.cell.budget}, {"coef", t.coef}});
    doc["estimate"] = r.estimate;
    doc["lo"] = r.ci.lo;
    doc["hi"] = r.ci.hi;
    return doc;
}

nlohmann::ordered_json bootstrap_to_json(const BootstrapResult& r) {
    nlohmann::ordered_json doc;
    doc["n_draws"] = r.n_draws;
    doc["alpha"] = r.alpha;
    doc["seed"] = r.seed;
    doc["quantile_rule"] = BootstrapResult::kQuantileRule;
    doc["interval_type"] = BootstrapResult::kIntervalType;
    doc["band_quantile"] = r.band_quantile;
    doc["cells"] = nlohmann::ordered_json::array();
    for (const auto& c : r.cells) {
        nlohmann::ordered_json jc;
        jc["system"] = c.system;
        jc["budget"] = c.budget;
        jc["theta"] = c.theta;
        jc["lo_pt"] = c.pointwise.lo;
        jc["hi_pt"] = c.pointwise.hi;
        jc["lo_band"] = c.band.lo;
        jc["hi_band"] = c.band.hi;
        jc["draw_sd"] = c.draw_sd;
        doc["cells"].push_back(std::move(jc));
    }
    doc["contrasts"] = nlohmann::ordered_json::array();
    for (const auto& c : r.contrasts) doc["contrasts"].push_back(contrast_to_json(c));
    doc["warnings"] = r.warnings;
    return doc;
}

}  // namespace siren
