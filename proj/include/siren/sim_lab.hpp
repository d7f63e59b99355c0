#pragma once

// Synthetic Bernoulli item-response benchmarks with known ground truth, and
// the coverage / nonregularity / optimism studies built on them.
//
// DGP: item difficulty d_i ~ Uniform(lo, hi), artifact quality q_k,
// Z_ik ~ Bernoulli(logistic(q_k - d_i)), all draws independent.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "siren/baselines.hpp"
#include "siren/bootstrap_engine.hpp"
#include "siren/score_store.hpp"
#include "siren/selector.hpp"
#include "siren/split_engine.hpp"

namespace siren {

struct DgpSpec {
    std::size_t M = 500;
    std::vector<double> qualities;
    double difficulty_low = -2.0;
    double difficulty_high = 2.0;
    std::uint64_t seed = 0;
};

void check_dgp(const DgpSpec& dgp);

double logistic(double x) noexcept;

// K values equally spaced over [lo, hi] (K = 1 gives lo).
std::vector<double> equally_spaced(std::size_t K, double lo, double hi);

// E[logistic(q - d)] for d ~ Uniform(lo, hi), in closed form.
double population_mean(double quality, double difficulty_low, double difficulty_high);

std::vector<double> sample_difficulties(std::size_t M, double lo, double hi, std::uint64_t seed);

// One column per quality; column k uses substream (seed, stream_base + k).
ScoreMatrix sample_scores(std::span<const double> difficulties, std::span<const double> qualities,
                          std::uint64_t seed, std::uint64_t stream_base = 0);

// Single cell (system "sim", budget "0"), items item-0..item-(M-1),
// artifacts a0..a(K-1).
ScoreTensor sample_tensor(const DgpSpec& dgp);

// Shared protocol settings for simulation trials.
struct ProtocolConfig {
    std::size_t R = 5;
    double rho = 0.5;
    SelectorSpec selector{SelectorKind::Softmax, 0.1, 0.10};
    WeightRule weight_rule = WeightRule::Uniform;
    std::size_t n_boot = 500;
    double alpha = 0.05;
};

enum class Method { Siren, NaiveMax, SingleSplit, RepeatedArgmax };

std::string_view to_string(Method method) noexcept;

// Point estimate of `method` on the first cell of `tensor`; splits come from
// derive_seed(trial_seed, "design").
double method_estimate(const ScoreTensor& tensor, const ProtocolConfig& protocol, Method method,
                       std::uint64_t trial_seed);

struct GroundTruth {
    double theta_star = 0.0;
    std::size_t n_replications = 0;
    double sd = 0.0;
    double mc_se = 0.0;   // sd / sqrt(n_replications)
};

// Average of the method's estimate over n_gt fresh tensors (and fresh
// splits); replication t uses derive_seed(dgp.seed, "ground-truth", t).
GroundTruth ground_truth(const DgpSpec& dgp, const ProtocolConfig& protocol, Method method, std::size_t n_gt);

struct TrialResult {
    double theta_tilde = 0.0;
    Interval ci;
    bool covered = false;
    double width = 0.0;
    double pi_win = 0.0;
    SelectorKind resolved = SelectorKind::Softmax;
    double m1 = 0.0;
};

// Full SIREN pipeline (design, estimate, multiplier bootstrap) on the first
// cell of a sampled tensor, scored against theta_star.
TrialResult run_trial(const ScoreTensor& tensor, const ProtocolConfig& protocol, std::uint64_t trial_seed,
                      double theta_star);

// ---------------------------------------------------------------------------
// Study A: coverage and width of the multiplier bootstrap.

struct StudyAConfig {
    std::vector<std::size_t> M{100, 200, 500, 1000, 2000};
    std::vector<std::size_t> K{2, 5, 10};
    std::vector<std::size_t> R{5};
    std::size_t n_sim = 2000;
    std::size_t n_gt = 3000;            // 0 skips ground truth and coverage
    std::size_t item_bootstrap = 0;     // resamples per trial; 0 skips the comparison
    ItemBootstrapCentering item_bootstrap_centering = ItemBootstrapCentering::ReplicateMean;
    double quality_low = 0.0;
    double quality_high = 0.3;
    ProtocolConfig protocol;
    std::uint64_t seed = 0;
};

struct StudyARow {
    std::size_t M = 0, K = 0, R = 0;
    double theta_star = std::numeric_limits<double>::quiet_NaN();
    double gt_mc_se = std::numeric_limits<double>::quiet_NaN();
    double coverage = std::numeric_limits<double>::quiet_NaN();
    double coverage_se = std::numeric_limits<double>::quiet_NaN();
    double mean_width = 0.0;
    double mean_pi_win = 0.0;
    std::size_t n_sim = 0;
    // Nonparametric item-bootstrap comparison (present when requested).
    std::optional<double> ib_coverage;
    std::optional<double> ib_mean_width;
    std::optional<double> width_ratio;   // multiplier / item bootstrap
    double multiplier_seconds = 0.0;
    double item_bootstrap_seconds = 0.0;
};

struct WidthSlope {
    std::size_t K = 0, R = 0;
    double slope = 0.0;   // least-squares slope of log(width) on log(M)
};

struct StudyAResult {
    std::vector<StudyARow> rows;
    std::vector<WidthSlope> slopes;
};

StudyAResult run_study_a(const StudyAConfig& cfg);

// ---------------------------------------------------------------------------
// Study B: near-tie behaviour of hard, soft and adaptive selection (K = 2).

struct StudyBConfig {
    std::vector<double> deltas{0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40,
                               0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80};
    std::vector<SelectorKind> selectors{SelectorKind::Hard, SelectorKind::Softmax, SelectorKind::Adaptive};
    std::size_t M = 500;
    double base_quality = 0.5;
    std::size_t n_sim = 2000;
    std::size_t n_gt = 3000;
    ProtocolConfig protocol;
    std::uint64_t seed = 0;
};

struct StudyBRow {
    double delta = 0.0;
    SelectorKind selector = SelectorKind::Hard;
    double theta_star = 0.0;
    double gt_mc_se = 0.0;
    double coverage = 0.0;
    double coverage_se = 0.0;
    double mean_width = 0.0;
    double mean_pi_win = 0.0;
    double hard_fraction = 0.0;   // share of trials that resolved to hard
    double true_sd = 0.0;         // sd of theta across trials
    double implied_sd = 0.0;      // mean half-width / z_{1-alpha/2}
    double missed_fraction = 0.0; // 1 - implied_sd / true_sd
    std::size_t n_sim = 0;
};

std::vector<StudyBRow> run_study_b(const StudyBConfig& cfg);

// ---------------------------------------------------------------------------
// Study C: same-data optimism for two equal systems with unequal search.

enum class Pairing { Paired, Independent };

std::string_view to_string(Pairing pairing) noexcept;

struct StudyCConfig {
    std::vector<std::size_t> h_grid{3, 5, 10, 20, 50};
    std::size_t H_B = 3;
    std::size_t M = 500;
    double quality = 0.5;
    Pairing pairing = Pairing::Paired;
    std::size_t n_sim = 2000;
    std::size_t n_gt = 10000;
    ProtocolConfig protocol;
    std::uint64_t seed = 0;
};

struct StudyCRow {
    std::size_t H_A = 0, H_B = 0;
    double theta_star = 0.0;
    double gt_mc_se = 0.0;
    double m1_bias_pp = 0.0;      // mean(M1_A) - theta*
    double siren_bias_pp = 0.0;   // mean(theta_A) - theta*
    double m1_fwr = 0.0;          // P(M1_A > M1_B)
    double siren_fwr = 0.0;       // P(A's interval lies entirely above B's)
    double siren_overlap = 0.0;   // P(intervals overlap)
    double sigma_hat = 0.0;       // sqrt(M) * sd of a single artifact's pool mean
    double theory_pp = 0.0;       // sigma sqrt(2 log H_A) / sqrt(M)
    std::size_t n_sim = 0;
};

std::vector<StudyCRow> run_study_c(const StudyCConfig& cfg);

// ---------------------------------------------------------------------------
// Directional accuracy against Monte Carlo references.

struct CellValue {
    CellRef cell;
    double value = 0.0;
};

struct DirectionalSummary {
    std::size_t agree = 0;
    std::size_t cells = 0;
    double bias_pp = 0.0;   // mean(estimate_A - theta*_A) in percentage points
};

// A cell agrees when sign(est_A - ref_B) == sign(ref_A - ref_B), with
// sign(0) = 0. Throws MismatchedCells if the three cell sets differ.
DirectionalSummary directional_summary(const std::vector<CellValue>& estimates_a,
                                       const std::vector<CellValue>& theta_star_a,
                                       const std::vector<CellValue>& theta_star_b);

// ---------------------------------------------------------------------------
// Tidy outputs.

void write_study_a_csv(const StudyAResult& result, std::ostream& out);
void write_study_b_csv(const std::vector<StudyBRow>& rows, std::ostream& out);
void write_study_c_csv(const std::vector<StudyCRow>& rows, std::ostream& out);
nlohmann::ordered_json study_a_to_json(const StudyAResult& result);
nlohmann::ordered_json study_b_to_json(const std::vector<StudyBRow>& rows);
nlohmann::ordered_json study_c_to_json(const std::vector<StudyCRow>& rows);

}  // namespace siren
