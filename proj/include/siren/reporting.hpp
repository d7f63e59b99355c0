#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "siren/baselines.hpp"
#include "siren/bootstrap_engine.hpp"
#include "siren/score_store.hpp"
#include "siren/selector.hpp"
#include "siren/siren_core.hpp"
#include "siren/split_engine.hpp"

namespace siren {

inline constexpr const char* kToolVersion = "0.1.0";

struct ReportConfig {
    std::size_t R = 10;
    double rho_score = 0.5;
    SelectorSpec selector{SelectorKind::Softmax, 1.0, 0.10};
    WeightRule weight_rule = WeightRule::Uniform;
    std::size_t n_boot = 2000;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    std::size_t item_bootstrap = 0;   // resamples; 0 leaves the item-bootstrap baseline out
    std::vector<ContrastSpec> contrasts;
    bool include_psi = false;
};

// Throws InvalidArgument naming the first setting that breaks a module precondition.
void check_report_config(const ReportConfig& cfg);

nlohmann::ordered_json config_to_json(const ReportConfig& cfg);
// Missing keys keep the values already in `base`.
ReportConfig config_from_json(const nlohmann::json& doc, ReportConfig base = {});

struct ReportSeeds {
    std::uint64_t master = 0;
    std::uint64_t design = 0;
    std::uint64_t bootstrap = 0;
    std::uint64_t m4 = 0;
    std::uint64_t item_bootstrap = 0;
};

ReportSeeds derive_report_seeds(std::uint64_t master);

struct Report {
    std::string fingerprint;
    std::size_t item_count = 0;
    ReportConfig config;
    ReportSeeds seeds;
    SplitDesign design;
    SirenEstimate estimate;
    BootstrapResult bootstrap;
    std::vector<BaselineReport> baselines;
};

// design -> estimate -> multiplier bootstrap (+ contrasts) -> baselines.
// M3 reuses split 0 of the report's design; M4 draws its own splits.
Report build_report(const ScoreTensor& tensor, const ReportConfig& cfg);

nlohmann::ordered_json report_to_json(const Report& report);

// system,budget,theta,lo_pt,hi_pt,lo_band,hi_band
void write_intervals_csv(const BootstrapResult& result, std::ostream& out);
// method,system,budget,theta,lo_pt,hi_pt,lo_band,hi_band (band columns empty)
void write_baselines_csv(const std::vector<BaselineReport>& reports, std::ostream& out);
// Per-cell diagnostics: system,budget,theta,pi_win,resolved_selector
void write_diagnostics_csv(const SirenEstimate& est, std::ostream& out);

}  // namespace siren
