#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "siren/baselines.hpp"
#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"
#include "siren/siren_core.hpp"
#include "support.hpp"

using namespace siren;
using namespace siren::testing;

namespace {

const CellRef kCell{"S", "b1"};
const SelectorSpec kSoft{SelectorKind::Softmax, 0.1, 0.1};
const SelectorSpec kHard{SelectorKind::Hard, 1.0, 0.1};

ScoreTensor tensor_from_matrix(const ScoreMatrix& z) {
    std::vector<std::vector<double>> rows(z.rows(), std::vector<double>(z.cols()));
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (std::size_t k = 0; k < z.cols(); ++k) rows[i][k] = z(i, k);
    return tensor_from_rows(rows);
}

bool disjoint(std::vector<std::uint32_t> a, std::vector<std::uint32_t> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::vector<std::uint32_t> both;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
    return both.empty();
}

}  // namespace

TEST_CASE("M1 is the best column mean") {
    // Column means 0.3 and 0.5.
    const auto t = tensor_from_rows({{1, 1}, {0, 1}, {0, 0}, {0, 0}, {0, 0}, {0, 1}, {1, 0}, {0, 1},
                                     {1, 0}, {0, 1}});
    CHECK(m1_naive_max(t, kCell) == doctest::Approx(0.5));

    std::vector<std::vector<double>> one(50, {0.0});
    for (int i = 0; i < 21; ++i) one[i][0] = 1.0;
    CHECK(m1_naive_max(tensor_from_rows(one), kCell) == doctest::Approx(0.42));

    CHECK_THROWS_AS(m1_naive_max(t, {"S", "nope"}), Error);
}

TEST_CASE("M2 Wald interval") {
    std::vector<std::vector<double>> rows(100, {0.0});
    for (int i = 0; i < 50; ++i) rows[i][0] = 1.0;
    const auto t = tensor_from_rows(rows);
    const WaldResult w = m2_wald(t, kCell, 0.05);
    CHECK(w.binomial);
    CHECK(w.estimate == doctest::Approx(0.5));
    CHECK((w.ci.hi - w.ci.lo) / 2.0 == doctest::Approx(1.959964 * 0.05).epsilon(1e-5));
    CHECK(w.estimate == m1_naive_max(t, kCell));

    SUBCASE("all correct gives a zero-width flagged interval") {
        const WaldResult p1 = m2_wald(constant_tensor(40, 3, 1.0), kCell, 0.05);
        CHECK(p1.degenerate_variance);
        CHECK(p1.ci.lo == 1.0);
        CHECK(p1.ci.hi == 1.0);
    }
    SUBCASE("fractional scores use the sample sd") {
        const auto f = tensor_from_rows({{0.2}, {0.4}, {0.6}, {0.8}});
        const WaldResult r = m2_wald(f, kCell, 0.05);
        CHECK_FALSE(r.binomial);
        const double sd = std::sqrt((0.09 + 0.01 + 0.01 + 0.09) / 3.0);
        CHECK(r.ci.hi - r.estimate == doctest::Approx(1.959964 * sd / 2.0).epsilon(1e-5));
    }
    SUBCASE("M2 estimate equals M1 on random data") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto r = tensor_from_matrix(random_scores(60, 4, s));
            CHECK(m2_wald(r, kCell, 0.1).estimate == m1_naive_max(r, kCell));
        }
    }
    CHECK_THROWS_AS(m2_wald(t, kCell, 1.0), Error);
}

TEST_CASE("M3 single split") {
    SUBCASE("constant tensor") {
        CHECK(m3_single_split(constant_tensor(30, 4, 0.7), kCell, 0.5, 3) == doctest::Approx(0.7));
    }
    SUBCASE("hand case") {
        const auto t = tensor_from_rows({{1, 0}, {1, 1}, {0, 1}, {0, 1}});
        // Artifact 0 wins the scoring fold 1.0 vs 0.5 and scores 0 held out.
        CHECK(m3_single_split(t, kCell, Split{{0, 1}, {2, 3}}) == 0.0);
        // Reversed folds: artifact 1 wins 1.0 vs 0.0, held-out mean 0.5.
        CHECK(m3_single_split(t, kCell, Split{{2, 3}, {0, 1}}) == doctest::Approx(0.5));
    }
    SUBCASE("ties go to the lowest index") {
        const auto t = tensor_from_rows({{1, 0}, {0, 1}, {0, 1}, {1, 1}});
        CHECK(m3_single_split(t, kCell, Split{{0, 1}, {2, 3}}) == doctest::Approx(0.5));
    }
    SUBCASE("equals the repeated-split estimator with R = 1 and hard selection") {
        for (std::uint64_t s = 0; s < 20; ++s) {
            const auto t = tensor_from_matrix(random_scores(80, 5, 100 + s));
            const SplitDesign d = make_design(80, 1, 0.5, WeightRule::Uniform, s);
            CHECK(m3_single_split(t, kCell, 0.5, s) == estimate(t, d, kHard, {.influence = false}).cells[0].theta);
        }
    }
    SUBCASE("errors") {
        const auto t = constant_tensor(10, 2, 0.5);
        CHECK_THROWS_AS(m3_single_split(t, kCell, Split{{0, 1}, {}}), Error);
        try {
            m3_single_split(t, kCell, Split{{0, 1}, {2, 10}});
            FAIL("expected IndexOutOfRange");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IndexOutOfRange);
        }
    }
}

TEST_CASE("M4 repeated argmax with a t interval") {
    SUBCASE("two splits with outputs 0.4 and 0.6") {
        // Find a seed whose two evaluation folds are disjoint, then plant the outputs.
        const std::size_t M = 8;
        std::uint64_t seed = 0;
        SplitDesign d;
        for (;; ++seed) {
            d = make_design(M, 2, 0.5, WeightRule::Uniform, seed);
            if (disjoint(d.splits[0].eval, d.splits[1].eval)) break;
        }
        std::vector<std::vector<double>> rows(M, {0.0});
        for (auto i : d.splits[0].eval) rows[i][0] = 0.4;
        for (auto i : d.splits[1].eval) rows[i][0] = 0.6;
        const auto r = m4_repeated_argmax_t(tensor_from_rows(rows), kCell, 2, 0.5, 0.05, seed);
        REQUIRE(r.split_outputs.size() == 2);
        CHECK(r.split_outputs[0] == doctest::Approx(0.4));
        CHECK(r.split_outputs[1] == doctest::Approx(0.6));
        CHECK(r.estimate == doctest::Approx(0.5));
        const double half = 12.7062047 * std::sqrt(0.02) / std::sqrt(2.0);
        CHECK(r.ci.hi - r.estimate == doctest::Approx(half).epsilon(1e-6));
        CHECK(r.estimate - r.ci.lo == doctest::Approx(half).epsilon(1e-6));
    }
    SUBCASE("equal outputs give zero width") {
        const auto r = m4_repeated_argmax_t(constant_tensor(20, 3, 0.25), kCell, 5, 0.5, 0.05, 1);
        CHECK(r.ci.lo == doctest::Approx(0.25));
        CHECK(r.ci.hi == doctest::Approx(0.25));
    }
    SUBCASE("split outputs match M3 on each split") {
        const auto t = tensor_from_matrix(random_scores(60, 3, 9));
        const auto r = m4_repeated_argmax_t(t, kCell, 4, 0.5, 0.05, 77);
        const SplitDesign d = make_design(60, 4, 0.5, WeightRule::Uniform, 77);
        for (std::size_t s = 0; s < 4; ++s) CHECK(r.split_outputs[s] == m3_single_split(t, kCell, d.splits[s]));
    }
    CHECK_THROWS_AS(m4_repeated_argmax_t(constant_tensor(10, 2, 0.5), kCell, 1, 0.5, 0.05, 0), Error);
}

TEST_CASE("resample_items gathers rows in order") {
    const auto t = tensor_from_rows({{0.1, 0.2}, {0.3, 0.4}, {0.5, 0.6}});
    const ScoreTensor r = resample_items(t, {2, 2, 0});
    REQUIRE(r.item_count() == 3);
    CHECK(r.items == std::vector<std::string>{"i2", "i2", "i0"});
    const auto& z = r.cells[0].scores;
    CHECK(z(0, 0) == 0.5);
    CHECK(z(1, 1) == 0.6);
    CHECK(z(2, 1) == 0.2);
}

TEST_CASE("item bootstrap") {
    SUBCASE("constant tensor gives zero width") {
        const auto t = constant_tensor(40, 3, 0.6);
        const SplitDesign d = make_design(40, 3, 0.5, WeightRule::Uniform, 2);
        const auto rep = item_bootstrap(t, d, kSoft, 50, 0.05, 4);
        REQUIRE(rep.cells.size() == 1);
        CHECK(rep.cells[0].estimate == doctest::Approx(0.6));
        CHECK(rep.cells[0].ci->hi - rep.cells[0].ci->lo == doctest::Approx(0.0));
    }
    SUBCASE("single resample against a direct recomputation") {
        const std::size_t M = 50;
        const auto t = tensor_from_matrix(random_scores(M, 3, 5));
        const SplitDesign d = make_design(M, 3, 0.5, WeightRule::Uniform, 6);
        CounterRng rng(derive_seed(11, "item-bootstrap"), 0);
        std::vector<std::uint32_t> idx(M);
        for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(M));
        const double star = estimate(resample_items(t, idx), d, kSoft, {.influence = false}).cells[0].theta;
        const double theta = estimate(t, d, kSoft, {.influence = false}).cells[0].theta;

        const auto by_estimate = item_bootstrap(t, d, kSoft, 1, 0.05, 11, ItemBootstrapCentering::Estimate);
        CHECK(by_estimate.cells[0].estimate == theta);
        CHECK(by_estimate.cells[0].ci->hi - theta == doctest::Approx(std::abs(star - theta)));
        CHECK(by_estimate.design["centering"] == "estimate");

        // One replicate is its own mean.
        const auto by_mean = item_bootstrap(t, d, kSoft, 1, 0.05, 11);
        CHECK(by_mean.cells[0].ci->hi == doctest::Approx(theta));
        CHECK(by_mean.design["centering"] == "replicate-mean");
    }
    SUBCASE("reproducible and thread invariant") {
        const auto t = random_grid(60, 2, 2, 3, 8);
        const SplitDesign d = make_design(60, 4, 0.5, WeightRule::Uniform, 1);
        set_thread_count(1);
        const auto a = item_bootstrap(t, d, kSoft, 40, 0.1, 3);
        set_thread_count(3);
        const auto b = item_bootstrap(t, d, kSoft, 40, 0.1, 3);
        set_thread_count(1);
        REQUIRE(a.cells.size() == 4);
        for (std::size_t c = 0; c < 4; ++c) {
            CHECK(a.cells[c].ci->lo == b.cells[c].ci->lo);
            CHECK(a.cells[c].ci->hi == b.cells[c].ci->hi);
            CHECK(a.cells[c].ci->hi > a.cells[c].ci->lo);
        }
        CHECK(baseline_to_json(a).dump() == baseline_to_json(b).dump());
    }
    SUBCASE("errors") {
        const auto t = constant_tensor(10, 2, 0.5);
        const SplitDesign d = make_design(10, 2, 0.5, WeightRule::Uniform, 0);
        CHECK_THROWS_AS(item_bootstrap(t, d, kSoft, 0, 0.05, 0), Error);
        CHECK_THROWS_AS(item_bootstrap(t, d, kSoft, 5, 0.0, 0), Error);
    }
}
