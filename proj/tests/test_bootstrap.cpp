#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "siren/bootstrap_engine.hpp"
#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"
#include "siren/sim_lab.hpp"
#include "support.hpp"

using namespace siren;
using namespace siren::testing;

namespace {

const SelectorSpec kSoft01{SelectorKind::Softmax, 0.1, 0.1};

SirenEstimate single_cell(std::vector<double> psi, double theta = 0.5) {
    SirenEstimate e;
    e.item_count = psi.size();
    CellEstimate c;
    c.system = "S";
    c.budget = "b";
    c.theta = theta;
    c.psi = std::move(psi);
    e.cells.push_back(std::move(c));
    return e;
}

SirenEstimate grid_estimate(std::size_t M, std::uint64_t seed) {
    const ScoreTensor t = random_grid(M, 2, 2, 5, seed);
    return estimate(t, make_design(M, 5, 0.5, WeightRule::Uniform, seed), kSoft01);
}

}  // namespace

TEST_CASE("zero influence gives zero draws and zero-width intervals") {
    const ScoreTensor t = constant_tensor(50, 3, 0.4);
    const SirenEstimate e = estimate(t, make_design(50, 3, 0.5, WeightRule::Uniform, 1), kSoft01);
    const BootstrapConfig cfg{500, 0.05, 3};
    const DrawMatrix d = multiplier_draws(e, cfg);
    for (std::size_t b = 0; b < d.draws(); ++b) CHECK(d(b, 0) == 0.0);
    const BootstrapResult r = intervals(e, d, cfg);
    CHECK(r.cells[0].pointwise.lo == r.cells[0].theta);
    CHECK(r.cells[0].pointwise.hi == r.cells[0].theta);
    CHECK(r.cells[0].band.width() == 0.0);
}

TEST_CASE("draw spread matches the conditional Gaussian closed form") {
    std::vector<double> psi(400);
    CounterRng rng(1, 2);
    for (auto& p : psi) p = rng.normal() * 0.7 + (rng.uniform() < 0.1 ? 2.0 : 0.0);
    const SirenEstimate e = single_cell(psi);
    const double M = 400.0;
    const double v = sample_sd(psi) * sample_sd(psi);
    const DrawMatrix d = multiplier_draws(e, {10000, 0.05, 5});
    const double sd = sample_sd(d.column(0));
    CHECK(std::abs(sd / std::sqrt((M - 1) / M * v) - 1.0) < 0.03);
}

TEST_CASE("identical cells get identical draws") {
    SirenEstimate e = single_cell({0.3, -0.1, 0.5, -0.7, 0.0, 0.2});
    CellEstimate twin = e.cells[0];
    twin.system = "T";
    e.cells.push_back(twin);
    const DrawMatrix d = multiplier_draws(e, {300, 0.05, 8});
    for (std::size_t b = 0; b < 300; ++b) CHECK(d(b, 0) == d(b, 1));
}

TEST_CASE("alternating +-1 draws give half-width 1/sqrt(M)") {
    const SirenEstimate e = single_cell(std::vector<double>(64, 0.0), 0.3);
    DrawMatrix d(200, 1);
    for (std::size_t b = 0; b < 200; ++b) d(b, 0) = b % 2 == 0 ? 1.0 : -1.0;
    const BootstrapResult r = intervals(e, d, {200, 0.05, 0});
    CHECK(r.cells[0].pointwise.half_width() == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
    CHECK(r.cells[0].band.half_width() == doctest::Approx(1.0 / 8.0).epsilon(1e-14));
    CHECK(r.cells[0].pointwise.contains(0.3));
}

TEST_CASE("band dominates pointwise and intervals are centred") {
    const SirenEstimate e = grid_estimate(150, 4);
    const BootstrapConfig cfg{1000, 0.05, 2};
    const BootstrapResult r = intervals(e, multiplier_draws(e, cfg), cfg);
    REQUIRE(r.cells.size() == 4);
    for (const auto& c : r.cells) {
        CHECK(c.band.width() >= c.pointwise.width());
        CHECK(c.pointwise.contains(c.theta));
        CHECK((c.pointwise.lo + c.pointwise.hi) / 2 == doctest::Approx(c.theta).epsilon(1e-14));
        CHECK(c.draw_sd > 0.0);
    }
    CHECK(r.band_quantile > 0.0);
    const auto doc = bootstrap_to_json(r);
    CHECK(doc["quantile_rule"] == "nearest-rank-upper");
    CHECK(doc["interval_type"] == "symmetric-abs");
}

TEST_CASE("conditional normality of the draws") {
    const SirenEstimate e = grid_estimate(200, 6);
    const DrawMatrix d = multiplier_draws(e, {50000, 0.05, 1});
    const auto g = d.column(0);
    const double mu = mean(g);
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : g) {
        const double z = x - mu;
        m2 += z * z;
        m3 += z * z * z;
        m4 += z * z * z * z;
    }
    const double n = static_cast<double>(g.size());
    m2 /= n;
    m3 /= n;
    m4 /= n;
    CHECK(std::abs(m3 / std::pow(m2, 1.5)) < 0.1);
    CHECK(std::abs(m4 / (m2 * m2) - 3.0) < 0.2);
}

TEST_CASE("draws do not depend on the thread count") {
    const SirenEstimate e = grid_estimate(120, 3);
    const BootstrapConfig cfg{777, 0.05, 9};
    set_thread_count(1);
    const DrawMatrix a = multiplier_draws(e, cfg);
    set_thread_count(3);
    const DrawMatrix b = multiplier_draws(e, cfg);
    set_thread_count(1);
    CHECK(a == b);
    CHECK(bootstrap_to_json(intervals(e, a, cfg)).dump() == bootstrap_to_json(intervals(e, b, cfg)).dump());
    CHECK_FALSE(a == multiplier_draws(e, {777, 0.05, 10}));
}

TEST_CASE("contrasts") {
    const SirenEstimate e = grid_estimate(200, 7);
    const BootstrapConfig cfg{2000, 0.05, 4};
    const DrawMatrix d = multiplier_draws(e, cfg);
    const BootstrapResult r = intervals(e, d, cfg);

    SUBCASE("single unit coefficient reproduces the pointwise interval") {
        const ContrastResult c = contrast_ci(e, d, {{{e.cells[2].ref(), 1.0}}}, cfg);
        CHECK(c.estimate == e.cells[2].theta);
        CHECK(c.ci.lo == r.cells[2].pointwise.lo);
        CHECK(c.ci.hi == r.cells[2].pointwise.hi);
    }
    SUBCASE("a cell minus itself cancels") {
        SirenEstimate twin = e;
        CellEstimate copy = twin.cells[0];
        copy.system = "copy";
        twin.cells.push_back(copy);
        const DrawMatrix dt = multiplier_draws(twin, cfg);
        const ContrastResult c = contrast_ci(twin, dt, {{{twin.cells[0].ref(), 1.0}, {copy.ref(), -1.0}}}, cfg);
        CHECK(c.estimate == 0.0);
        CHECK(c.ci.width() == 0.0);
    }
    SUBCASE("cross-budget gain agrees with bootstrapping the difference series") {
        const CellRef hi{"sys0", "16"}, lo{"sys0", "8"};
        const BootstrapConfig big{20000, 0.05, 21};
        const ContrastResult c = contrast_ci(e, multiplier_draws(e, big), {{{hi, 1.0}, {lo, -1.0}}}, big);
        std::vector<double> diff(200);
        const auto& a = e.cells[e.index_of(hi)].psi;
        const auto& b = e.cells[e.index_of(lo)].psi;
        for (std::size_t i = 0; i < 200; ++i) diff[i] = a[i] - b[i];
        const SirenEstimate direct = single_cell(diff, c.estimate);
        const BootstrapConfig other{20000, 0.05, 22};
        const BootstrapResult rd = intervals(direct, multiplier_draws(direct, other), other);
        CHECK(c.ci.width() == doctest::Approx(rd.cells[0].pointwise.width()).epsilon(0.02));
    }
    SUBCASE("errors") {
        try {
            contrast_ci(e, d, {{{{"ghost", "8"}, 1.0}}}, cfg);
            FAIL("expected throw");
        } catch (const Error& x) {
            CHECK(x.code() == ErrorCode::UnknownCell);
        }
        CHECK_THROWS_AS(contrast_ci(e, d, {}, cfg), Error);
        CHECK_THROWS_AS(contrast_ci(e, d, {{{e.cells[0].ref(), 0.0}}}, cfg), Error);
    }
}

TEST_CASE("contrast term parsing") {
    const ContrastTerm t = parse_contrast_term("A:b2:-1");
    CHECK(t.cell.system == "A");
    CHECK(t.cell.budget == "b2");
    CHECK(t.coef == -1.0);
    CHECK(parse_contrast_term("A:32:+0.5").coef == 0.5);
    CHECK(parse_contrast_term("A:x:y:2").cell.budget == "x:y");
    CHECK_THROWS_AS(parse_contrast_term("A:b2"), Error);
    CHECK_THROWS_AS(parse_contrast_term("A:b2:abc"), Error);
    CHECK_THROWS_AS(parse_contrast_term(":b2:1"), Error);
}

TEST_CASE("config checks and missing influence") {
    const SirenEstimate e = grid_estimate(50, 1);
    CHECK_THROWS_AS(check_bootstrap_config({0, 0.05, 0}), Error);
    CHECK_THROWS_AS(check_bootstrap_config({100, 1.0, 0}), Error);
    CHECK_FALSE(check_bootstrap_config({50, 0.05, 0}).empty());
    CHECK(check_bootstrap_config({100, 0.05, 0}).empty());
    const BootstrapResult r = intervals(e, multiplier_draws(e, {50, 0.05, 0}), {50, 0.05, 0});
    CHECK(r.warnings.size() == 1);

    SirenEstimate bare = e;
    bare.cells[1].psi.clear();
    try {
        multiplier_draws(bare, {100, 0.05, 0});
        FAIL("expected throw");
    } catch (const Error& x) {
        CHECK(x.code() == ErrorCode::MissingInfluence);
    }
    CHECK_THROWS_AS(intervals(e, DrawMatrix(10, 3), {10, 0.05, 0}), Error);
}

TEST_CASE("simulated Study A tensor: width near 0.055 at M=500") {
    // Averaged over a handful of tensors; the full-scale check lives in the acceptance suite.
    double total = 0.0;
    const int n = 20;
    for (int s = 0; s < n; ++s) {
        DgpSpec dgp;
        dgp.M = 500;
        dgp.qualities = equally_spaced(10, 0.0, 0.3);
        dgp.seed = 1000 + s;
        const ScoreTensor t = sample_tensor(dgp);
        const SirenEstimate e = estimate(t, make_design(500, 5, 0.5, WeightRule::Uniform, s), kSoft01);
        const BootstrapConfig cfg{500, 0.05, static_cast<std::uint64_t>(s)};
        total += intervals(e, multiplier_draws(e, cfg), cfg).cells[0].pointwise.width();
    }
    CHECK(total / n == doctest::Approx(0.055).epsilon(0.08));
}
