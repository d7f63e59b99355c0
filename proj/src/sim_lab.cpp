#include "siren/sim_lab.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <ostream>

#include "siren/baselines.hpp"
#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"
#include "siren/siren_core.hpp"

namespace siren {

void check_dgp(const DgpSpec& dgp) {
    if (dgp.M == 0) throw Error(ErrorCode::InvalidArgument, "DGP needs at least one item");
    if (dgp.qualities.empty()) throw Error(ErrorCode::InvalidArgument, "DGP needs at least one artifact");
    if (!(dgp.difficulty_low < dgp.difficulty_high))
        throw Error(ErrorCode::InvalidArgument, "difficulty_low must be below difficulty_high");
    for (double q : dgp.qualities)
        if (std::isnan(q)) throw Error(ErrorCode::InvalidArgument, "artifact quality is NaN");
}

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

std::vector<double> equally_spaced(std::size_t K, double lo, double hi) {
    std::vector<double> q(K, lo);
    if (K < 2) return q;
    for (std::size_t k = 0; k < K; ++k) q[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(K - 1);
    return q;
}

double population_mean(double quality, double lo, double hi) {
    auto softplus = [](double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); };
    return (softplus(quality - lo) - softplus(quality - hi)) / (hi - lo);
}

std::vector<double> sample_difficulties(std::size_t M, double lo, double hi, std::uint64_t seed) {
    CounterRng rng(derive_seed(seed, "difficulty"), 0);
    std::vector<double> d(M);
    for (auto& v : d) v = lo + (hi - lo) * rng.uniform();
    return d;
}

ScoreMatrix sample_scores(std::span<const double> difficulties, std::span<const double> qualities,
                          std::uint64_t seed, std::uint64_t stream_base) {
    const std::size_t M = difficulties.size(), K = qualities.size();
    ScoreMatrix z(M, K);
    const std::uint64_t key = derive_seed(seed, "scores");
    for (std::size_t k = 0; k < K; ++k) {
        CounterRng rng(key, stream_base + k);
        auto col = z.column(k);
        for (std::size_t i = 0; i < M; ++i) {
            const double p = logistic(qualities[k] - difficulties[i]);
            col[i] = rng.uniform() < p ? 1.0 : 0.0;
        }
    }
    return z;
}

namespace {

std::vector<std::string> item_names(std::size_t M) {
    std::vector<std::string> items(M);
    for (std::size_t i = 0; i < M; ++i) items[i] = "item-" + std::to_string(i);
    return items;
}

Cell make_cell(std::string system, std::string budget, ScoreMatrix scores) {
    Cell cell;
    cell.system = std::move(system);
    cell.budget = std::move(budget);
    cell.artifacts.resize(scores.cols());
    for (std::size_t k = 0; k < scores.cols(); ++k) cell.artifacts[k] = "a" + std::to_string(k);
    cell.scores = std::move(scores);
    return cell;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double proportion_se(double p, std::size_t n) { return n > 0 ? std::sqrt(p * (1.0 - p) / static_cast<double>(n)) : 0.0; }

}  // namespace

ScoreTensor sample_tensor(const DgpSpec& dgp) {
    check_dgp(dgp);
    const auto d = sample_difficulties(dgp.M, dgp.difficulty_low, dgp.difficulty_high, dgp.seed);
    ScoreTensor t;
    t.items = item_names(dgp.M);
    t.budget_grid = {"0"};
    t.cells.push_back(make_cell("sim", "0", sample_scores(d, dgp.qualities, dgp.seed)));
    return t;
}

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::Siren: return "siren";
        case Method::NaiveMax: return "M1";
        case Method::SingleSplit: return "M3";
        case Method::RepeatedArgmax: return "M4";
    }
    return "unknown";
}

double method_estimate(const ScoreTensor& tensor, const ProtocolConfig& p, Method method, std::uint64_t trial_seed) {
    const CellRef cell = tensor.cells.front().ref();
    const std::uint64_t design_seed = derive_seed(trial_seed, "design");
    switch (method) {
        case Method::Siren: {
            const SplitDesign d = make_design(tensor.item_count(), p.R, p.rho, p.weight_rule, design_seed);
            return estimate(tensor, d, p.selector, {.influence = false}).cells.front().theta;
        }
        case Method::NaiveMax: return m1_naive_max(tensor, cell);
        case Method::SingleSplit: return m3_single_split(tensor, cell, p.rho, design_seed);
        case Method::RepeatedArgmax:
            return m4_repeated_argmax_t(tensor, cell, p.R, p.rho, p.alpha, design_seed).estimate;
    }
    return 0.0;
}

GroundTruth ground_truth(const DgpSpec& dgp, const ProtocolConfig& protocol, Method method, std::size_t n_gt) {
    check_dgp(dgp);
    if (n_gt == 0) throw Error(ErrorCode::InvalidArgument, "ground truth needs at least one replication");
    std::vector<double> values(n_gt);
    parallel_for(n_gt, [&](std::size_t begin, std::size_t end) {
        for (std::size_t t = begin; t < end; ++t) {
            DgpSpec rep = dgp;
            rep.seed = derive_seed(dgp.seed, "ground-truth", t);
            values[t] = method_estimate(sample_tensor(rep), protocol, method, rep.seed);
        }
    });
    GroundTruth gt;
    gt.n_replications = n_gt;
    gt.theta_star = mean(values);
    gt.sd = sample_sd(values);
    gt.mc_se = gt.sd / std::sqrt(static_cast<double>(n_gt));
    return gt;
}

TrialResult run_trial(const ScoreTensor& tensor, const ProtocolConfig& p, std::uint64_t trial_seed,
                      double theta_star) {
    const SplitDesign d =
        make_design(tensor.item_count(), p.R, p.rho, p.weight_rule, derive_seed(trial_seed, "design"));
    const SirenEstimate est = estimate(tensor, d, p.selector);
    const BootstrapConfig bc{p.n_boot, p.alpha, derive_seed(trial_seed, "boot")};
    const BootstrapResult br = intervals(est, multiplier_draws(est, bc), bc);

    TrialResult tr;
    tr.theta_tilde = est.cells.front().theta;
    tr.ci = br.cells.front().pointwise;
    tr.covered = tr.ci.contains(theta_star);
    tr.width = tr.ci.width();
    tr.pi_win = est.cells.front().pi_win;
    tr.resolved = est.cells.front().resolved;
    tr.m1 = m1_naive_max(tensor, tensor.cells.front().ref());
    return tr;
}

// ---------------------------------------------------------------------------
// Study A

StudyAResult run_study_a(const StudyAConfig& cfg) {
    if (cfg.M.empty() || cfg.K.empty() || cfg.R.empty())
        throw Error(ErrorCode::InvalidArgument, "study A grid is empty");
    if (cfg.n_sim == 0) throw Error(ErrorCode::InvalidArgument, "study A needs n_sim >= 1");
    check_selector(cfg.protocol.selector);

    StudyAResult result;
    for (std::size_t K : cfg.K) {
        for (std::size_t R : cfg.R) {
            for (std::size_t M : cfg.M) {
                const std::string tag =
                    "M=" + std::to_string(M) + ",K=" + std::to_string(K) + ",R=" + std::to_string(R);
                ProtocolConfig protocol = cfg.protocol;
                protocol.R = R;
                DgpSpec dgp;
                dgp.M = M;
                dgp.qualities = equally_spaced(K, cfg.quality_low, cfg.quality_high);

                StudyARow row;
                row.M = M;
                row.K = K;
                row.R = R;
                row.n_sim = cfg.n_sim;
                double theta_star = std::numeric_limits<double>::quiet_NaN();
                if (cfg.n_gt > 0) {
                    dgp.seed = derive_seed(cfg.seed, "study-a/gt/" + tag);
                    const GroundTruth gt = ground_truth(dgp, protocol, Method::Siren, cfg.n_gt);
                    theta_star = row.theta_star = gt.theta_star;
                    row.gt_mc_se = gt.mc_se;
                }

                std::vector<TrialResult> trials(cfg.n_sim);
                std::vector<double> ib_width(cfg.n_sim, 0.0);
                std::vector<char> ib_cover(cfg.n_sim, 0);
                std::vector<double> mult_secs(cfg.n_sim, 0.0), ib_secs(cfg.n_sim, 0.0);
                parallel_for(cfg.n_sim, [&](std::size_t begin, std::size_t end) {
                    for (std::size_t t = begin; t < end; ++t) {
                        DgpSpec trial = dgp;
                        trial.seed = derive_seed(cfg.seed, "study-a/" + tag, t);
                        const ScoreTensor tensor = sample_tensor(trial);
                        const auto t0 = std::chrono::steady_clock::now();
                        trials[t] = run_trial(tensor, protocol, trial.seed, theta_star);
                        const auto t1 = std::chrono::steady_clock::now();
                        mult_secs[t] = std::chrono::duration<double>(t1 - t0).count();
                        if (cfg.item_bootstrap > 0) {
                            const SplitDesign d = make_design(M, R, protocol.rho, protocol.weight_rule,
                                                              derive_seed(trial.seed, "design"));
                            const BaselineReport ib =
                                item_bootstrap(tensor, d, protocol.selector, cfg.item_bootstrap, protocol.alpha,
                                               derive_seed(trial.seed, "item-bootstrap"),
                                               cfg.item_bootstrap_centering);
                            const Interval ci = *ib.cells.front().ci;
                            ib_width[t] = ci.width();
                            ib_cover[t] = ci.contains(theta_star);
                            ib_secs[t] =
                                std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
                        }
                    }
                });

                std::vector<double> widths(cfg.n_sim), pis(cfg.n_sim);
                std::size_t covered = 0;
                for (std::size_t t = 0; t < cfg.n_sim; ++t) {
                    widths[t] = trials[t].width;
                    pis[t] = trials[t].pi_win;
                    covered += trials[t].covered;
                }
                row.mean_width = mean(widths);
                row.mean_pi_win = mean(pis);
                if (cfg.n_gt > 0) {
                    row.coverage = static_cast<double>(covered) / static_cast<double>(cfg.n_sim);
                    row.coverage_se = proportion_se(row.coverage, cfg.n_sim);
                }
                row.multiplier_seconds = pairwise_sum(mult_secs);
                if (cfg.item_bootstrap > 0) {
                    row.ib_mean_width = mean(ib_width);
                    row.width_ratio = row.mean_width / *row.ib_mean_width;
                    if (cfg.n_gt > 0) {
                        const auto c = std::count(ib_cover.begin(), ib_cover.end(), 1);
                        row.ib_coverage = static_cast<double>(c) / static_cast<double>(cfg.n_sim);
                    }
                    row.item_bootstrap_seconds = pairwise_sum(ib_secs);
                }
                result.rows.push_back(row);
            }

            // Width scaling per (K, R).
            std::vector<double> x, y;
            for (const auto& row : result.rows) {
                if (row.K == K && row.R == R && row.mean_width > 0.0) {
                    x.push_back(std::log(static_cast<double>(row.M)));
                    y.push_back(std::log(row.mean_width));
                }
            }
            if (x.size() >= 2) {
                const double mx = mean(x), my = mean(y);
                double sxy = 0.0, sxx = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    sxy += (x[i] - mx) * (y[i] - my);
                    sxx += (x[i] - mx) * (x[i] - mx);
                }
                if (sxx > 0.0) result.slopes.push_back({K, R, sxy / sxx});
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Study B

std::vector<StudyBRow> run_study_b(const StudyBConfig& cfg) {
    if (cfg.deltas.empty() || cfg.selectors.empty()) throw Error(ErrorCode::InvalidArgument, "study B grid is empty");
    if (cfg.n_sim == 0 || cfg.n_gt == 0) throw Error(ErrorCode::InvalidArgument, "study B needs n_sim, n_gt >= 1");
    for (double d : cfg.deltas)
        if (!(d >= 0.0)) throw Error(ErrorCode::InvalidArgument, "study B gaps must be nonnegative");

    const std::size_t S = cfg.selectors.size();
    const double z = normal_quantile(1.0 - cfg.protocol.alpha / 2.0);
    std::vector<StudyBRow> rows;
    for (double delta : cfg.deltas) {
        const std::string tag = "delta=" + fmt(delta);
        DgpSpec dgp;
        dgp.M = cfg.M;
        dgp.qualities = {cfg.base_quality + delta, cfg.base_quality};

        std::vector<ProtocolConfig> protocols(S, cfg.protocol);
        for (std::size_t s = 0; s < S; ++s) {
            protocols[s].selector.kind = cfg.selectors[s];
            check_selector(protocols[s].selector);
        }

        // Ground truth per selector on common replications.
        std::vector<double> gt_values(cfg.n_gt * S);
        const std::uint64_t gt_seed = derive_seed(cfg.seed, "study-b/gt/" + tag);
        parallel_for(cfg.n_gt, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                DgpSpec rep = dgp;
                rep.seed = derive_seed(gt_seed, "ground-truth", t);
                const ScoreTensor tensor = sample_tensor(rep);
                for (std::size_t s = 0; s < S; ++s)
                    gt_values[t * S + s] = method_estimate(tensor, protocols[s], Method::Siren, rep.seed);
            }
        });

        std::vector<TrialResult> trials(cfg.n_sim * S);
        parallel_for(cfg.n_sim, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                DgpSpec trial = dgp;
                trial.seed = derive_seed(cfg.seed, "study-b/" + tag, t);
                const ScoreTensor tensor = sample_tensor(trial);
                for (std::size_t s = 0; s < S; ++s)
                    trials[t * S + s] = run_trial(tensor, protocols[s], trial.seed, 0.0);
            }
        });

        for (std::size_t s = 0; s < S; ++s) {
            StudyBRow row;
            row.delta = delta;
            row.selector = cfg.selectors[s];
            row.n_sim = cfg.n_sim;
            std::vector<double> g(cfg.n_gt);
            for (std::size_t t = 0; t < cfg.n_gt; ++t) g[t] = gt_values[t * S + s];
            row.theta_star = mean(g);
            row.gt_mc_se = sample_sd(g) / std::sqrt(static_cast<double>(cfg.n_gt));

            std::vector<double> theta(cfg.n_sim), half(cfg.n_sim), width(cfg.n_sim), pis(cfg.n_sim);
            std::size_t covered = 0, hard = 0;
            for (std::size_t t = 0; t < cfg.n_sim; ++t) {
                const TrialResult& tr = trials[t * S + s];
                theta[t] = tr.theta_tilde;
                width[t] = tr.width;
                half[t] = tr.ci.half_width();
                pis[t] = tr.pi_win;
                covered += tr.ci.contains(row.theta_star);
                hard += tr.resolved == SelectorKind::Hard;
            }
            row.coverage = static_cast<double>(covered) / static_cast<double>(cfg.n_sim);
            row.coverage_se = proportion_se(row.coverage, cfg.n_sim);
            row.mean_width = mean(width);
            row.mean_pi_win = mean(pis);
            row.hard_fraction = static_cast<double>(hard) / static_cast<double>(cfg.n_sim);
            row.true_sd = sample_sd(theta);
            row.implied_sd = mean(half) / z;
            row.missed_fraction = row.true_sd > 0.0 ? 1.0 - row.implied_sd / row.true_sd : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Study C

std::string_view to_string(Pairing pairing) noexcept {
    return pairing == Pairing::Paired ? "paired" : "independent";
}

namespace {

struct StudyCTrial {
    double siren_a = 0.0;
    double m1_a = 0.0;
    double m1_b = 0.0;
    Interval ci_a, ci_b;
    double single_mean = 0.0;   // pool mean of A's first artifact
};

StudyCTrial study_c_trial(const StudyCConfig& cfg, std::size_t H_A, std::uint64_t seed) {
    const ProtocolConfig& p = cfg.protocol;
    const std::vector<double> qa(H_A, cfg.quality), qb(cfg.H_B, cfg.quality);
    StudyCTrial out;

    auto run = [&](const ScoreTensor& tensor, std::uint64_t design_seed, std::uint64_t boot_seed) {
        const SplitDesign d = make_design(tensor.item_count(), p.R, p.rho, p.weight_rule, design_seed);
        const SirenEstimate est = estimate(tensor, d, p.selector);
        const BootstrapConfig bc{p.n_boot, p.alpha, boot_seed};
        return std::make_pair(est, intervals(est, multiplier_draws(est, bc), bc));
    };

    if (cfg.pairing == Pairing::Paired) {
        const auto diff = sample_difficulties(cfg.M, -2.0, 2.0, seed);
        ScoreTensor t;
        t.items = item_names(cfg.M);
        t.budget_grid = {"0"};
        t.cells.push_back(make_cell("A", "0", sample_scores(diff, qa, derive_seed(seed, "system-A"))));
        t.cells.push_back(make_cell("B", "0", sample_scores(diff, qb, derive_seed(seed, "system-B"))));
        const auto [est, br] = run(t, derive_seed(seed, "design"), derive_seed(seed, "boot"));
        out.siren_a = est.cells[0].theta;
        out.ci_a = br.cells[0].pointwise;
        out.ci_b = br.cells[1].pointwise;
        out.m1_a = m1_naive_max(t, t.cells[0].ref());
        out.m1_b = m1_naive_max(t, t.cells[1].ref());
        out.single_mean = mean(t.cells[0].scores.column(0));
    } else {
        auto system = [&](std::string_view name, const std::vector<double>& q) {
            const std::uint64_t s = derive_seed(seed, std::string("system-") + std::string(name));
            ScoreTensor t;
            t.items = item_names(cfg.M);
            t.budget_grid = {"0"};
            t.cells.push_back(make_cell(std::string(name), "0",
                                        sample_scores(sample_difficulties(cfg.M, -2.0, 2.0, s), q, s)));
            return t;
        };
        const ScoreTensor ta = system("A", qa), tb = system("B", qb);
        const auto [ea, ba] = run(ta, derive_seed(seed, "design-A"), derive_seed(seed, "boot-A"));
        const auto [eb, bb] = run(tb, derive_seed(seed, "design-B"), derive_seed(seed, "boot-B"));
        out.siren_a = ea.cells[0].theta;
        out.ci_a = ba.cells[0].pointwise;
        out.ci_b = bb.cells[0].pointwise;
        out.m1_a = m1_naive_max(ta, ta.cells[0].ref());
        out.m1_b = m1_naive_max(tb, tb.cells[0].ref());
        out.single_mean = mean(ta.cells[0].scores.column(0));
    }
    return out;
}

}  // namespace

std::vector<StudyCRow> run_study_c(const StudyCConfig& cfg) {
    if (cfg.h_grid.empty()) throw Error(ErrorCode::InvalidArgument, "study C grid is empty");
    if (cfg.H_B == 0 || cfg.n_sim == 0 || cfg.n_gt == 0)
        throw Error(ErrorCode::InvalidArgument, "study C needs H_B, n_sim, n_gt >= 1");
    check_selector(cfg.protocol.selector);

    std::vector<StudyCRow> rows;
    for (std::size_t H_A : cfg.h_grid) {
        if (H_A == 0) throw Error(ErrorCode::InvalidArgument, "study C library sizes must be positive");
        const std::string tag = "H_A=" + std::to_string(H_A) + ",H_B=" + std::to_string(cfg.H_B) + "," +
                                std::string(to_string(cfg.pairing));
        DgpSpec dgp;
        dgp.M = cfg.M;
        dgp.qualities.assign(H_A, cfg.quality);
        dgp.seed = derive_seed(cfg.seed, "study-c/gt/" + tag);
        const GroundTruth gt = ground_truth(dgp, cfg.protocol, Method::Siren, cfg.n_gt);

        std::vector<StudyCTrial> trials(cfg.n_sim);
        parallel_for(cfg.n_sim, [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t)
                trials[t] = study_c_trial(cfg, H_A, derive_seed(cfg.seed, "study-c/" + tag, t));
        });

        StudyCRow row;
        row.H_A = H_A;
        row.H_B = cfg.H_B;
        row.n_sim = cfg.n_sim;
        row.theta_star = gt.theta_star;
        row.gt_mc_se = gt.mc_se;
        std::vector<double> m1(cfg.n_sim), sa(cfg.n_sim), single(cfg.n_sim);
        std::size_t m1_wins = 0, siren_wins = 0, overlap = 0;
        for (std::size_t t = 0; t < cfg.n_sim; ++t) {
            const auto& tr = trials[t];
            m1[t] = tr.m1_a;
            sa[t] = tr.siren_a;
            single[t] = tr.single_mean;
            m1_wins += tr.m1_a > tr.m1_b;
            siren_wins += tr.ci_a.lo > tr.ci_b.hi;
            overlap += !(tr.ci_a.lo > tr.ci_b.hi || tr.ci_b.lo > tr.ci_a.hi);
        }
        const double n = static_cast<double>(cfg.n_sim);
        row.m1_bias_pp = 100.0 * (mean(m1) - gt.theta_star);
        row.siren_bias_pp = 100.0 * (mean(sa) - gt.theta_star);
        row.m1_fwr = static_cast<double>(m1_wins) / n;
        row.siren_fwr = static_cast<double>(siren_wins) / n;
        row.siren_overlap = static_cast<double>(overlap) / n;
        row.sigma_hat = sample_sd(single) * std::sqrt(static_cast<double>(cfg.M));
        row.theory_pp = 100.0 * row.sigma_hat * std::sqrt(2.0 * std::log(static_cast<double>(H_A))) /
                        std::sqrt(static_cast<double>(cfg.M));
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Directional summary

DirectionalSummary directional_summary(const std::vector<CellValue>& est_a, const std::vector<CellValue>& ref_a,
                                       const std::vector<CellValue>& ref_b) {
    auto index = [](const std::vector<CellValue>& v, std::string_view what) {
        std::map<std::string, double> m;
        for (const auto& cv : v)
            if (!m.emplace(cv.cell.label(), cv.value).second)
                throw Error(ErrorCode::MismatchedCells, std::string(what) + " lists cell " + cv.cell.label() + " twice");
        return m;
    };
    const auto e = index(est_a, "estimates"), a = index(ref_a, "reference A"), b = index(ref_b, "reference B");
    if (e.size() != a.size() || e.size() != b.size())
        throw Error(ErrorCode::MismatchedCells, "estimate and reference cell sets differ in size");
    auto sign = [](double x) { return (x > 0.0) - (x < 0.0); };

    DirectionalSummary out;
    out.cells = e.size();
    double bias = 0.0;
    for (const auto& [label, value] : e) {
        auto ia = a.find(label), ib = b.find(label);
        if (ia == a.end() || ib == b.end())
            throw Error(ErrorCode::MismatchedCells, "cell " + label + " has no reference value");
        out.agree += sign(value - ib->second) == sign(ia->second - ib->second);
        bias += value - ia->second;
    }
    out.bias_pp = out.cells > 0 ? 100.0 * bias / static_cast<double>(out.cells) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Outputs

void write_study_a_csv(const StudyAResult& r, std::ostream& out) {
    out << "M,K,R,n_sim,theta_star,gt_mc_se,coverage,coverage_se,mean_width,mean_pi_win,"
           "ib_coverage,ib_mean_width,width_ratio\n";
    auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
    for (const auto& row : r.rows) {
        out << row.M << ',' << row.K << ',' << row.R << ',' << row.n_sim << ',' << fmt(row.theta_star) << ','
            << fmt(row.gt_mc_se) << ',' << fmt(row.coverage) << ',' << fmt(row.coverage_se) << ','
            << fmt(row.mean_width) << ',' << fmt(row.mean_pi_win) << ',' << opt(row.ib_coverage) << ','
            << opt(row.ib_mean_width) << ',' << opt(row.width_ratio) << '\n';
    }
}

void write_study_b_csv(const std::vector<StudyBRow>& rows, std::ostream& out) {
    out << "delta,selector,n_sim,theta_star,gt_mc_se,coverage,coverage_se,mean_width,mean_pi_win,hard_fraction,"
           "true_sd,implied_sd,missed_fraction\n";
    for (const auto& r : rows) {
        out << fmt(r.delta) << ',' << to_string(r.selector) << ',' << r.n_sim << ',' << fmt(r.theta_star) << ','
            << fmt(r.gt_mc_se) << ',' << fmt(r.coverage) << ',' << fmt(r.coverage_se) << ',' << fmt(r.mean_width)
            << ',' << fmt(r.mean_pi_win) << ',' << fmt(r.hard_fraction) << ',' << fmt(r.true_sd) << ','
            << fmt(r.implied_sd) << ',' << fmt(r.missed_fraction) << '\n';
    }
}

void write_study_c_csv(const std::vector<StudyCRow>& rows, std::ostream& out) {
    out << "H_A,H_B,n_sim,theta_star,gt_mc_se,m1_bias_pp,siren_bias_pp,m1_fwr,siren_fwr,siren_overlap,sigma_hat,"
           "theory_pp\n";
    for (const auto& r : rows) {
        out << r.H_A << ',' << r.H_B << ',' << r.n_sim << ',' << fmt(r.theta_star) << ',' << fmt(r.gt_mc_se) << ','
            << fmt(r.m1_bias_pp) << ',' << fmt(r.siren_bias_pp) << ',' << fmt(r.m1_fwr) << ',' << fmt(r.siren_fwr)
            << ',' << fmt(r.siren_overlap) << ',' << fmt(r.sigma_hat) << ',' << fmt(r.theory_pp) << '\n';
    }
}

namespace {

nlohmann::ordered_json number_or_null(double v) {
    return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v);
}

}  // namespace

nlohmann::ordered_json study_a_to_json(const StudyAResult& r) {
    nlohmann::ordered_json doc;
    doc["study"] = "A";
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json j;
        j["M"] = row.M;
        j["K"] = row.K;
        j["R"] = row.R;
        j["n_sim"] = row.n_sim;
        j["theta_star"] = number_or_null(row.theta_star);
        j["coverage"] = number_or_null(row.coverage);
        j["coverage_se"] = number_or_null(row.coverage_se);
        j["mean_width"] = row.mean_width;
        j["mean_pi_win"] = row.mean_pi_win;
        if (row.width_ratio) {
            j["ib_coverage"] = row.ib_coverage ? nlohmann::ordered_json(*row.ib_coverage) : nullptr;
            j["ib_mean_width"] = *row.ib_mean_width;
            j["width_ratio"] = *row.width_ratio;
        }
        doc["rows"].push_back(std::move(j));
    }
    doc["width_slopes"] = nlohmann::ordered_json::array();
    for (const auto& s : r.slopes) doc["width_slopes"].push_back({{"K", s.K}, {"R", s.R}, {"slope", s.slope}});
    return doc;
}

nlohmann::ordered_json study_b_to_json(const std::vector<StudyBRow>& rows) {
    nlohmann::ordered_json doc;
    doc["study"] = "B";
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        doc["rows"].push_back({{"delta", r.delta},
                               {"selector", std::string(to_string(r.selector))},
                               {"theta_star", r.theta_star},
                               {"coverage", r.coverage},
                               {"mean_width", r.mean_width},
                               {"mean_pi_win", r.mean_pi_win},
                               {"true_sd", r.true_sd},
                               {"implied_sd", r.implied_sd},
                               {"missed_fraction", r.missed_fraction}});
    }
    return doc;
}

nlohmann::ordered_json study_c_to_json(const std::vector<StudyCRow>& rows) {
    nlohmann::ordered_json doc;
    doc["study"] = "C";
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        doc["rows"].push_back({{"H_A", r.H_A},
                               {"H_B", r.H_B},
                               {"theta_star", r.theta_star},
                               {"m1_bias_pp", r.m1_bias_pp},
                               {"siren_bias_pp", r.siren_bias_pp},
                               {"m1_fwr", r.m1_fwr},
                               {"siren_fwr", r.siren_fwr},
                               {"theory_pp", r.theory_pp}});
    }
    return doc;
}

}  // namespace siren
