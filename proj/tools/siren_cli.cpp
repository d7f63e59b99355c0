// siren: command-line front end for reports, simulations, baselines and contrasts.
//
// Settings are resolved as flags > --config file > defaults. The seed default
// comes from SIREN_SEED when set. Exit codes: 0 ok, 2 usage or validation
// failure, 1 internal error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "siren/baselines.hpp"
#include "siren/bootstrap_engine.hpp"
#include "siren/error.hpp"
#include "siren/parallel.hpp"
#include "siren/reporting.hpp"
#include "siren/score_store.hpp"
#include "siren/sim_lab.hpp"
#include "siren/siren_core.hpp"

namespace fs = std::filesystem;
using namespace siren;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

// Raised for problems with the command line itself.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t env_seed() {
    const char* text = std::getenv("SIREN_SEED");
    if (text == nullptr || *text == '\0') return 0;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used, 0);
        if (used != std::string(text).size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("SIREN_SEED is not an unsigned integer: ") + text);
    }
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

void write_json(const fs::path& path, const nlohmann::ordered_json& doc) { write_text(path, doc.dump(2) + "\n"); }

template <class F>
void write_stream(const fs::path& path, F&& fill) {
    std::ostringstream buf;
    fill(buf);
    write_text(path, buf.str());
}

// Options shared by commands that run the pipeline on a score file.
struct PipelineFlags {
    std::string scores;
    std::string format;
    std::string config;
    std::size_t R = 0;
    double rho = 0.0;
    std::string selector;
    double tau = 0.0;
    double threshold = 0.0;
    std::string weight_rule;
    std::size_t n_boot = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    std::size_t item_bootstrap = 0;
    CLI::Option* o_R = nullptr;
    CLI::Option* o_rho = nullptr;
    CLI::Option* o_selector = nullptr;
    CLI::Option* o_tau = nullptr;
    CLI::Option* o_threshold = nullptr;
    CLI::Option* o_weight = nullptr;
    CLI::Option* o_boot = nullptr;
    CLI::Option* o_alpha = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_ib = nullptr;

    void attach(CLI::App* cmd, bool with_item_bootstrap) {
        cmd->add_option("--scores", scores, "Score tensor (long CSV or JSON)")->required();
        cmd->add_option("--format", format, "Input format: csv or json (default: from extension)")
            ->check(CLI::IsMember({"csv", "json"}));
        cmd->add_option("--config", config, "JSON config file; flags take precedence");
        o_R = cmd->add_option("--R", R, "Number of repeated splits");
        o_rho = cmd->add_option("--rho", rho, "Scoring fraction rho_score");
        o_selector = cmd->add_option("--selector", selector, "softmax, hard or adaptive");
        o_tau = cmd->add_option("--tau", tau, "Softmax temperature");
        o_threshold = cmd->add_option("--instability-threshold", threshold, "Adaptive rule threshold on pi_win");
        o_weight = cmd->add_option("--weight-rule", weight_rule, "uniform or eval-size");
        o_boot = cmd->add_option("--n-boot", n_boot, "Multiplier bootstrap draws");
        o_alpha = cmd->add_option("--alpha", alpha, "Miscoverage level");
        o_seed = cmd->add_option("--seed", seed, "Master seed (default: SIREN_SEED or 0)");
        if (with_item_bootstrap)
            o_ib = cmd->add_option("--item-bootstrap", item_bootstrap, "Item-bootstrap resamples (0 = off)");
    }

    ReportConfig resolve() const {
        ReportConfig cfg;
        cfg.seed = env_seed();
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw Error(ErrorCode::IoError, "cannot open config " + config);
            nlohmann::json doc;
            try {
                in >> doc;
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::ParseError, config + ": " + e.what());
            }
            try {
                cfg = config_from_json(doc, cfg);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::ParseError, config + ": " + e.what());
            }
        }
        if (o_R->count()) cfg.R = R;
        if (o_rho->count()) cfg.rho_score = rho;
        if (o_selector->count()) cfg.selector.kind = parse_selector_kind(selector);
        if (o_tau->count()) cfg.selector.tau = tau;
        if (o_threshold->count()) cfg.selector.instability_threshold = threshold;
        if (o_weight->count()) cfg.weight_rule = parse_weight_rule(weight_rule);
        if (o_boot->count()) cfg.n_boot = n_boot;
        if (o_alpha->count()) cfg.alpha = alpha;
        if (o_seed->count()) cfg.seed = seed;
        if (o_ib != nullptr && o_ib->count()) cfg.item_bootstrap = item_bootstrap;
        check_report_config(cfg);
        return cfg;
    }

    ScoreTensor load() const {
        if (!fs::exists(scores)) throw Error(ErrorCode::IoError, "score file not found: " + scores);
        ScoreTensor t = format.empty() ? load_tensor(scores)
                                       : load_tensor(scores, format == "json" ? TensorFormat::Json : TensorFormat::LongCsv);
        require_valid(t);
        return t;
    }
};

std::string fmt(double v, int digits = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

void print_intervals(const BootstrapResult& res, std::ostream& out) {
    out << std::left << std::setw(16) << "system" << std::setw(10) << "budget" << std::right << std::setw(9) << "theta"
        << std::setw(20) << "pointwise" << std::setw(20) << "band" << "\n";
    for (const auto& c : res.cells) {
        out << std::left << std::setw(16) << c.system << std::setw(10) << c.budget << std::right << std::setw(9)
            << fmt(c.theta) << std::setw(20) << ("[" + fmt(c.pointwise.lo) + ", " + fmt(c.pointwise.hi) + "]")
            << std::setw(20) << ("[" + fmt(c.band.lo) + ", " + fmt(c.band.hi) + "]") << "\n";
    }
    for (const auto& c : res.contrasts) {
        std::string label;
        for (const auto& t : c.spec.terms) {
            if (!label.empty()) label += " ";
            label += (t.coef >= 0 ? "+" : "") + fmt(t.coef, 3) + "*" + t.cell.label();
        }
        out << "contrast " << label << ": " << fmt(c.estimate) << " [" << fmt(c.ci.lo) << ", " << fmt(c.ci.hi)
            << "]\n";
    }
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
}

ContrastSpec parse_contrast_list(const std::string& text) {
    ContrastSpec spec;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        if (item.empty()) continue;
        spec.terms.push_back(parse_contrast_term(item));
    }
    if (spec.terms.empty()) throw UsageError("empty contrast '" + text + "'");
    return spec;
}

// --- report -------------------------------------------------------------

struct ReportCmd {
    PipelineFlags flags;
    std::string out;
    std::string csv_dir;
    std::vector<std::string> contrasts;
    bool include_psi = false;

    void attach(CLI::App* cmd) {
        flags.attach(cmd, true);
        cmd->add_option("--out", out, "Write the JSON report here");
        cmd->add_option("--csv-dir", csv_dir, "Write intervals.csv, baselines.csv and diagnostics.csv here");
        cmd->add_option("--contrast", contrasts, "Contrast as comma-separated system:budget:coef terms (repeatable)");
        cmd->add_flag("--include-psi", include_psi, "Include influence contributions in the JSON report");
    }

    int run() const {
        ReportConfig cfg = flags.resolve();
        for (const auto& c : contrasts) cfg.contrasts.push_back(parse_contrast_list(c));
        if (include_psi) cfg.include_psi = true;
        const ScoreTensor t = flags.load();
        const Report rep = build_report(t, cfg);
        if (!out.empty()) write_json(out, report_to_json(rep));
        if (!csv_dir.empty()) {
            const fs::path dir(csv_dir);
            write_stream(dir / "intervals.csv", [&](std::ostream& s) { write_intervals_csv(rep.bootstrap, s); });
            write_stream(dir / "baselines.csv", [&](std::ostream& s) { write_baselines_csv(rep.baselines, s); });
            write_stream(dir / "diagnostics.csv", [&](std::ostream& s) { write_diagnostics_csv(rep.estimate, s); });
        }
        std::cout << "tensor " << rep.fingerprint << "  M=" << rep.item_count << "  R=" << cfg.R
                  << "  selector=" << to_string(cfg.selector.kind) << "  seed=" << cfg.seed << "\n";
        print_intervals(rep.bootstrap, std::cout);
        return kExitOk;
    }
};

// --- baselines ------------------------------------------------------------

struct BaselinesCmd {
    PipelineFlags flags;
    std::string out;
    std::string csv;

    void attach(CLI::App* cmd) {
        flags.attach(cmd, true);
        cmd->add_option("--out", out, "Write the baseline reports as JSON");
        cmd->add_option("--csv", csv, "Write the flat baseline CSV here (default: stdout)");
    }

    int run() const {
        ReportConfig cfg = flags.resolve();
        const ScoreTensor t = flags.load();
        const Report rep = build_report(t, cfg);
        if (!out.empty()) {
            nlohmann::ordered_json doc = nlohmann::ordered_json::array();
            for (const auto& b : rep.baselines) doc.push_back(baseline_to_json(b));
            write_json(out, doc);
        }
        if (!csv.empty())
            write_stream(csv, [&](std::ostream& s) { write_baselines_csv(rep.baselines, s); });
        else
            write_baselines_csv(rep.baselines, std::cout);
        return kExitOk;
    }
};

// --- contrast -------------------------------------------------------------

struct ContrastCmd {
    PipelineFlags flags;
    std::vector<std::string> terms;
    std::string out;

    void attach(CLI::App* cmd) {
        flags.attach(cmd, false);
        cmd->add_option("terms", terms, "Contrast terms system:budget:coef");
        cmd->add_option("--out", out, "Write the contrast as JSON");
    }

    int run() const {
        if (terms.empty()) throw UsageError("contrast needs at least one system:budget:coef term");
        ContrastSpec spec;
        for (const auto& t : terms) spec.terms.push_back(parse_contrast_term(t));
        ReportConfig cfg = flags.resolve();
        const ScoreTensor t = flags.load();
        const SplitDesign design =
            make_design(t.item_count(), cfg.R, cfg.rho_score, cfg.weight_rule, derive_report_seeds(cfg.seed).design);
        const SirenEstimate est = estimate(t, design, cfg.selector);
        for (const auto& term : spec.terms) est.index_of(term.cell);   // unknown cells fail before any draws
        const BootstrapConfig bc{cfg.n_boot, cfg.alpha, derive_report_seeds(cfg.seed).bootstrap};
        const ContrastResult res = contrast_ci(est, multiplier_draws(est, bc), spec, bc);
        if (!out.empty()) write_json(out, contrast_to_json(res));
        std::cout << "estimate " << fmt(res.estimate, 6) << "  ci [" << fmt(res.ci.lo, 6) << ", " << fmt(res.ci.hi, 6)
                  << "]  alpha=" << cfg.alpha << "\n";
        return kExitOk;
    }
};

// --- validate -------------------------------------------------------------

struct ValidateCmd {
    std::string scores;
    std::string format;

    void attach(CLI::App* cmd) {
        cmd->add_option("--scores", scores, "Score tensor (long CSV or JSON)")->required();
        cmd->add_option("--format", format, "Input format: csv or json")->check(CLI::IsMember({"csv", "json"}));
    }

    int run() const {
        if (!fs::exists(scores)) throw Error(ErrorCode::IoError, "score file not found: " + scores);
        const ScoreTensor t = format.empty()
                                  ? load_tensor(scores)
                                  : load_tensor(scores, format == "json" ? TensorFormat::Json : TensorFormat::LongCsv);
        const auto problems = validate(t);
        if (problems.empty()) {
            std::cout << "ok: " << t.item_count() << " items, " << t.cells.size() << " cells, fingerprint "
                      << fingerprint(t) << "\n";
            return kExitOk;
        }
        for (const auto& v : problems) {
            std::cout << to_string(v.kind);
            if (!v.cell.empty()) std::cout << " cell=" << v.cell;
            if (!v.item.empty()) std::cout << " item=" << v.item;
            if (!v.artifact.empty()) std::cout << " artifact=" << v.artifact;
            std::cout << ": " << v.message << "\n";
        }
        return kExitUsage;
    }
};

// --- simulate -------------------------------------------------------------

struct SimulateCmd {
    std::vector<std::size_t> M, K, R, H;
    std::vector<double> delta;
    std::vector<std::string> selectors;
    std::size_t H_B = 3;
    std::string pairing = "paired";
    std::string ib_centering = "replicate-mean";
    std::size_t n_sim = 0, n_gt = 0, n_boot = 0, item_bootstrap = 0;
    double tau = 0.0, alpha = 0.05, rho = 0.5, quality = 0.5;
    std::uint64_t seed = 0;
    std::string csv, out;
    CLI::Option *o_nsim = nullptr, *o_ngt = nullptr, *o_boot = nullptr, *o_tau = nullptr, *o_seed = nullptr,
                *o_alpha = nullptr, *o_rho = nullptr, *o_quality = nullptr;

    void attach_common(CLI::App* cmd) {
        o_nsim = cmd->add_option("--n-sim", n_sim, "Monte Carlo trials per configuration");
        o_ngt = cmd->add_option("--n-gt", n_gt, "Replications for the ground-truth target");
        o_boot = cmd->add_option("--n-boot", n_boot, "Multiplier draws per trial");
        o_tau = cmd->add_option("--tau", tau, "Softmax temperature");
        o_alpha = cmd->add_option("--alpha", alpha, "Miscoverage level");
        o_rho = cmd->add_option("--rho", rho, "Scoring fraction");
        o_seed = cmd->add_option("--seed", seed, "Master seed (default: SIREN_SEED or 0)");
        cmd->add_option("--csv", csv, "Write the study CSV here (default: stdout)");
        cmd->add_option("--out", out, "Write the summary JSON here");
    }

    void apply(ProtocolConfig& p, std::size_t& cfg_n_sim, std::size_t& cfg_n_gt, std::uint64_t& cfg_seed) const {
        cfg_seed = o_seed->count() ? seed : env_seed();
        if (o_nsim->count()) cfg_n_sim = n_sim;
        if (o_ngt->count()) cfg_n_gt = n_gt;
        if (o_boot->count()) p.n_boot = n_boot;
        if (o_tau->count()) p.selector.tau = tau;
        if (o_alpha->count()) p.alpha = alpha;
        if (o_rho->count()) p.rho = rho;
        if (cfg_n_sim == 0) throw UsageError("--n-sim must be positive");
        if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
        if (!(p.rho > 0.0 && p.rho < 1.0)) throw UsageError("--rho must lie in (0, 1)");
        if (!(p.selector.tau > 0.0)) throw UsageError("--tau must be positive");
        if (p.n_boot == 0) throw UsageError("--n-boot must be positive");
    }

    void attach_grid(CLI::App* cmd) {
        cmd->add_option("--M", M, "Item counts")->delimiter(',');
        cmd->add_option("--R", R, "Split counts")->delimiter(',');
    }

    template <class WriteCsv>
    void emit(const nlohmann::ordered_json& summary, WriteCsv&& write_csv) const {
        if (!out.empty()) write_json(out, summary);
        if (!csv.empty())
            write_stream(csv, write_csv);
        else
            write_csv(std::cout);
    }

    int run_a() const {
        StudyAConfig cfg;
        if (!M.empty()) cfg.M = M;
        if (!K.empty()) cfg.K = K;
        if (!R.empty()) cfg.R = R;
        cfg.item_bootstrap = item_bootstrap;
        if (ib_centering == "estimate") cfg.item_bootstrap_centering = ItemBootstrapCentering::Estimate;
        apply(cfg.protocol, cfg.n_sim, cfg.n_gt, cfg.seed);
        for (auto m : cfg.M)
            if (m < 4) throw UsageError("--M values must be at least 4");
        for (auto k : cfg.K)
            if (k == 0) throw UsageError("--K values must be positive");
        for (auto r : cfg.R)
            if (r == 0) throw UsageError("--R values must be positive");
        const StudyAResult res = run_study_a(cfg);
        emit(study_a_to_json(res), [&](std::ostream& s) { write_study_a_csv(res, s); });
        return kExitOk;
    }

    int run_b() const {
        StudyBConfig cfg;
        if (!delta.empty()) cfg.deltas = delta;
        if (!M.empty()) {
            if (M.size() != 1) throw UsageError("study b takes a single --M");
            cfg.M = M.front();
        }
        if (!R.empty()) {
            if (R.size() != 1) throw UsageError("study b takes a single --R");
            cfg.protocol.R = R.front();
        }
        if (!selectors.empty()) {
            cfg.selectors.clear();
            for (const auto& s : selectors) cfg.selectors.push_back(parse_selector_kind(s));
        }
        apply(cfg.protocol, cfg.n_sim, cfg.n_gt, cfg.seed);
        if (cfg.n_gt == 0) throw UsageError("study b needs --n-gt > 0");
        for (double d : cfg.deltas)
            if (!(d >= 0.0)) throw UsageError("--delta values must be non-negative");
        const auto rows = run_study_b(cfg);
        emit(study_b_to_json(rows), [&](std::ostream& s) { write_study_b_csv(rows, s); });
        return kExitOk;
    }

    int run_c() const {
        StudyCConfig cfg;
        if (!H.empty()) cfg.h_grid = H;
        cfg.H_B = H_B;
        if (!M.empty()) {
            if (M.size() != 1) throw UsageError("study c takes a single --M");
            cfg.M = M.front();
        }
        if (!R.empty()) {
            if (R.size() != 1) throw UsageError("study c takes a single --R");
            cfg.protocol.R = R.front();
        }
        if (o_quality != nullptr && o_quality->count()) cfg.quality = quality;
        if (pairing == "paired")
            cfg.pairing = Pairing::Paired;
        else if (pairing == "independent")
            cfg.pairing = Pairing::Independent;
        else
            throw UsageError("--pairing must be paired or independent");
        apply(cfg.protocol, cfg.n_sim, cfg.n_gt, cfg.seed);
        if (cfg.n_gt == 0) throw UsageError("study c needs --n-gt > 0");
        for (auto h : cfg.h_grid)
            if (h == 0) throw UsageError("--H values must be positive");
        if (cfg.H_B == 0) throw UsageError("--H-B must be positive");
        const auto rows = run_study_c(cfg);
        emit(study_c_to_json(rows), [&](std::ostream& s) { write_study_c_csv(rows, s); });
        return kExitOk;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Selection-aware intervals for tuned benchmark results"};
    app.set_version_flag("--version", std::string("siren ") + kToolVersion);
    app.require_subcommand(1);
    std::size_t threads = 1;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); results do not depend on it");

    ReportCmd report;
    report.attach(app.add_subcommand("report", "Full pipeline: estimates, intervals, baselines, diagnostics"));
    BaselinesCmd baselines;
    baselines.attach(app.add_subcommand("baselines", "Winner-based baselines M1-M4 (and the item bootstrap)"));
    ContrastCmd contrast;
    contrast.attach(app.add_subcommand("contrast", "Interval for a linear contrast of cells"));
    ValidateCmd validate_cmd;
    validate_cmd.attach(app.add_subcommand("validate", "Check a score file"));

    CLI::App* simulate = app.add_subcommand("simulate", "Simulation studies a, b and c");
    simulate->require_subcommand(1);
    CLI::App* sim_a = simulate->add_subcommand("a", "Coverage and width scaling");
    CLI::App* sim_b = simulate->add_subcommand("b", "Near-tie behaviour of hard, soft and adaptive selection");
    CLI::App* sim_c = simulate->add_subcommand("c", "Same-data optimism with unequal search");
    SimulateCmd study_a, study_b, study_c;
    study_a.attach_common(sim_a);
    study_b.attach_common(sim_b);
    study_c.attach_common(sim_c);
    study_a.attach_grid(sim_a);
    study_b.attach_grid(sim_b);
    study_c.attach_grid(sim_c);
    sim_a->add_option("--K", study_a.K, "Artifact counts")->delimiter(',');
    sim_a->add_option("--item-bootstrap", study_a.item_bootstrap, "Item-bootstrap resamples per trial (0 = off)");
    sim_a->add_option("--ib-centering", study_a.ib_centering, "Item-bootstrap centre: replicate-mean or estimate")
        ->check(CLI::IsMember({"replicate-mean", "estimate"}));
    sim_b->add_option("--delta", study_b.delta, "Quality gaps")->delimiter(',');
    sim_b->add_option("--selector", study_b.selectors, "Selectors to compare")->delimiter(',');
    sim_c->add_option("--H", study_c.H, "Search sizes for system A")->delimiter(',');
    sim_c->add_option("--H-B", study_c.H_B, "Search size for system B");
    sim_c->add_option("--pairing", study_c.pairing, "paired or independent");
    study_c.o_quality = sim_c->add_option("--quality", study_c.quality, "Shared artifact quality");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        set_thread_count(threads);
        if (app.got_subcommand("report")) return report.run();
        if (app.got_subcommand("baselines")) return baselines.run();
        if (app.got_subcommand("contrast")) return contrast.run();
        if (app.got_subcommand("validate")) return validate_cmd.run();
        if (sim_a->parsed()) return study_a.run_a();
        if (sim_b->parsed()) return study_b.run_b();
        if (sim_c->parsed()) return study_c.run_c();
        std::cerr << "error: no command given\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
