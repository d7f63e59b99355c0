#include "siren/reporting.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "siren/error.hpp"
#include "siren/rng.hpp"

namespace siren {

void check_report_config(const ReportConfig& cfg) {
    if (cfg.R == 0) throw Error(ErrorCode::InvalidArgument, "R must be at least 1");
    if (!(cfg.rho_score > 0.0 && cfg.rho_score < 1.0))
        throw Error(ErrorCode::InvalidArgument, "rho_score must lie in (0, 1)");
    check_selector(cfg.selector);
    check_bootstrap_config({cfg.n_boot, cfg.alpha, cfg.seed});
}

nlohmann::ordered_json config_to_json(const ReportConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["R"] = cfg.R;
    doc["rho_score"] = cfg.rho_score;
    doc["selector"] = selector_to_json(cfg.selector);
    doc["weight_rule"] = std::string(to_string(cfg.weight_rule));
    doc["n_boot"] = cfg.n_boot;
    doc["alpha"] = cfg.alpha;
    doc["seed"] = cfg.seed;
    doc["item_bootstrap"] = cfg.item_bootstrap;
    if (!cfg.contrasts.empty()) {
        // Same "system:budget:coef" strings that config_from_json parses.
        auto& list = doc["contrasts"] = nlohmann::ordered_json::array();
        for (const auto& spec : cfg.contrasts) {
            nlohmann::ordered_json terms = nlohmann::ordered_json::array();
            for (const auto& t : spec.terms) {
                char buf[32];
                auto res = std::to_chars(buf, buf + sizeof buf, t.coef);
                terms.push_back(t.cell.system + ":" + t.cell.budget + ":" + std::string(buf, res.ptr));
            }
            list.push_back(std::move(terms));
        }
    }
    return doc;
}

ReportConfig config_from_json(const nlohmann::json& doc, ReportConfig cfg) {
    try {
        if (doc.contains("R")) cfg.R = doc.at("R").get<std::size_t>();
        if (doc.contains("rho_score")) cfg.rho_score = doc.at("rho_score").get<double>();
        if (doc.contains("selector")) cfg.selector = selector_from_json(doc.at("selector"));
        if (doc.contains("weight_rule")) cfg.weight_rule = parse_weight_rule(doc.at("weight_rule").get<std::string>());
        if (doc.contains("n_boot")) cfg.n_boot = doc.at("n_boot").get<std::size_t>();
        if (doc.contains("alpha")) cfg.alpha = doc.at("alpha").get<double>();
        if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
        if (doc.contains("item_bootstrap")) cfg.item_bootstrap = doc.at("item_bootstrap").get<std::size_t>();
        if (doc.contains("contrasts")) {
            for (const auto& jc : doc.at("contrasts")) {
                ContrastSpec spec;
                for (const auto& term : jc) spec.terms.push_back(parse_contrast_term(term.get<std::string>()));
                cfg.contrasts.push_back(std::move(spec));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    return cfg;
}

ReportSeeds derive_report_seeds(std::uint64_t master) {
    ReportSeeds s;
    s.master = master;
    s.design = derive_seed(master, "design");
    s.bootstrap = derive_seed(master, "bootstrap");
    s.m4 = derive_seed(master, "m4");
    s.item_bootstrap = derive_seed(master, "item-bootstrap");
    return s;
}

Report build_report(const ScoreTensor& tensor, const ReportConfig& cfg) {
    require_valid(tensor);
    check_report_config(cfg);

    Report rep;
    rep.fingerprint = fingerprint(tensor);
    rep.item_count = tensor.item_count();
    rep.config = cfg;
    rep.seeds = derive_report_seeds(cfg.seed);
    rep.design = make_design(tensor.item_count(), cfg.R, cfg.rho_score, cfg.weight_rule, rep.seeds.design);
    rep.estimate = estimate(tensor, rep.design, cfg.selector);

    const BootstrapConfig bc{cfg.n_boot, cfg.alpha, rep.seeds.bootstrap};
    const DrawMatrix draws = multiplier_draws(rep.estimate, bc);
    rep.bootstrap = intervals(rep.estimate, draws, bc);
    for (const auto& spec : cfg.contrasts) rep.bootstrap.contrasts.push_back(contrast_ci(rep.estimate, draws, spec, bc));

    const std::size_t m4_splits = std::max<std::size_t>(cfg.R, 2);
    BaselineReport m1{BaselineMethod::M1, {}, {}}, m2{BaselineMethod::M2, {}, {{"alpha", cfg.alpha}}},
        m3{BaselineMethod::M3, {}, {{"design_seed", rep.seeds.design}, {"split", 0}}},
        m4{BaselineMethod::M4, {}, {{"seed", rep.seeds.m4}, {"R", m4_splits}, {"rho", cfg.rho_score}, {"alpha", cfg.alpha}}};
    for (const auto& cell : tensor.cells) {
        const CellRef ref = cell.ref();
        m1.cells.push_back({cell.system, cell.budget, m1_naive_max(tensor, ref), std::nullopt, false});
        const WaldResult w = m2_wald(tensor, ref, cfg.alpha);
        m2.cells.push_back({cell.system, cell.budget, w.estimate, w.ci, w.degenerate_variance});
        m3.cells.push_back({cell.system, cell.budget, m3_single_split(tensor, ref, rep.design.splits.front()),
                            std::nullopt, false});
        const RepeatedArgmaxResult r4 =
            m4_repeated_argmax_t(tensor, ref, m4_splits, cfg.rho_score, cfg.alpha, rep.seeds.m4);
        m4.cells.push_back({cell.system, cell.budget, r4.estimate, r4.ci, false});
    }
    rep.baselines = {std::move(m1), std::move(m2), std::move(m3), std::move(m4)};
    if (cfg.item_bootstrap > 0)
        rep.baselines.push_back(item_bootstrap(tensor, rep.design, cfg.selector, cfg.item_bootstrap, cfg.alpha,
                                               rep.seeds.item_bootstrap));
    return rep;
}

nlohmann::ordered_json report_to_json(const Report& rep) {
    nlohmann::ordered_json doc;
    doc["tool"] = "siren";
    doc["version"] = kToolVersion;
    doc["tensor_fingerprint"] = rep.fingerprint;
    doc["item_count"] = rep.item_count;
    doc["config"] = config_to_json(rep.config);
    doc["seeds"] = {{"master", rep.seeds.master},
                    {"design", rep.seeds.design},
                    {"bootstrap", rep.seeds.bootstrap},
                    {"m4", rep.seeds.m4},
                    {"item_bootstrap", rep.seeds.item_bootstrap}};
    doc["design"] = design_to_json(rep.design);
    doc["estimate"] = estimate_to_json(rep.estimate, rep.config.include_psi);
    doc["bootstrap"] = bootstrap_to_json(rep.bootstrap);
    doc["baselines"] = nlohmann::ordered_json::array();
    for (const auto& b : rep.baselines) doc["baselines"].push_back(baseline_to_json(b));
    nlohmann::ordered_json diag = nlohmann::ordered_json::array();
    for (const auto& c : rep.estimate.cells)
        diag.push_back({{"system", c.system},
                        {"budget", c.budget},
                        {"pi_win", c.pi_win},
                        {"resolved_selector", std::string(to_string(c.resolved))}});
    doc["diagnostics"] = std::move(diag);
    return doc;
}

namespace {

std::string num(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

}  // namespace

void write_intervals_csv(const BootstrapResult& r, std::ostream& out) {
    out << "system,budget,theta,lo_pt,hi_pt,lo_band,hi_band\n";
    for (const auto& c : r.cells) {
        out << field(c.system) << ',' << field(c.budget) << ',' << num(c.theta) << ',' << num(c.pointwise.lo) << ','
            << num(c.pointwise.hi) << ',' << num(c.band.lo) << ',' << num(c.band.hi) << '\n';
    }
}

void write_baselines_csv(const std::vector<BaselineReport>& reports, std::ostream& out) {
    out << "method,system,budget,theta,lo_pt,hi_pt,lo_band,hi_band\n";
    for (const auto& rep : reports) {
        for (const auto& c : rep.cells) {
            out << to_string(rep.method) << ',' << field(c.system) << ',' << field(c.budget) << ',' << num(c.estimate)
                << ',';
            if (c.ci) out << num(c.ci->lo) << ',' << num(c.ci->hi);
            else out << ',';
            out << ",,\n";
        }
    }
}

void write_diagnostics_csv(const SirenEstimate& est, std::ostream& out) {
    out << "system,budget,theta,pi_win,resolved_selector\n";
    for (const auto& c : est.cells)
        out << field(c.system) << ',' << field(c.budget) << ',' << num(c.theta) << ',' << num(c.pi_win) << ','
            << to_string(c.resolved) << '\n';
}

}  // namespace siren
