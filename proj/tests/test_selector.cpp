#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "siren/error.hpp"
#include "siren/selector.hpp"

using namespace siren;

namespace {

const SelectorSpec kSoft1{SelectorKind::Softmax, 1.0, 0.1};
const SelectorSpec kHard{SelectorKind::Hard, 1.0, 0.1};

std::vector<double> random_vector(std::mt19937_64& gen, std::size_t K) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> s(K);
    for (auto& v : s) v = u(gen);
    return s;
}

}  // namespace

TEST_CASE("select examples") {
    const auto sym = select(kSoft1, std::vector<double>{0.3, 0.3});
    CHECK(sym[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(sym[1] == doctest::Approx(0.5).epsilon(1e-15));

    for (auto kind : {SelectorKind::Softmax, SelectorKind::Hard, SelectorKind::Adaptive})
        CHECK(select({kind, 1.0, 0.1}, std::vector<double>{0.7}) == std::vector<double>{1.0});

    const auto q = select(kSoft1, std::vector<double>{1.0, 0.0});
    CHECK(std::abs(q[0] - 0.7310585786300049) < 1e-12);
    CHECK(std::abs(q[1] - 0.2689414213699951) < 1e-12);

    CHECK(select(kHard, std::vector<double>{0.4, 0.4, 0.2}) == std::vector<double>{1.0, 0.0, 0.0});
    CHECK(argmax(std::vector<double>{0.1, 0.5, 0.5}) == 1);
}

TEST_CASE("select rejects bad input") {
    CHECK_THROWS_AS(select(kSoft1, std::vector<double>{}), Error);
    try {
        select(kSoft1, std::vector<double>{0.1, std::numeric_limits<double>::quiet_NaN()});
        FAIL("expected throw");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteScore);
    }
    CHECK_THROWS_AS(jacobian(kSoft1, std::vector<double>{std::numeric_limits<double>::infinity()}), Error);
    CHECK_THROWS_AS(check_selector({SelectorKind::Softmax, 0.0, 0.1}), Error);
    CHECK_THROWS_AS(check_selector({SelectorKind::Adaptive, 1.0, 1.5}), Error);
}

TEST_CASE("jacobian examples") {
    const auto J = jacobian(kSoft1, std::vector<double>{0.3, 0.3});
    const std::vector<double> expect{0.25, -0.25, -0.25, 0.25};
    for (std::size_t i = 0; i < 4; ++i) CHECK(J[i] == doctest::Approx(expect[i]).epsilon(1e-15));

    std::mt19937_64 gen(1);
    for (int rep = 0; rep < 10; ++rep) {
        const auto Jh = jacobian(kHard, random_vector(gen, 4));
        for (double v : Jh) CHECK(v == 0.0);
    }
}

TEST_CASE("weights stay on the simplex") {
    std::mt19937_64 gen(2);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t K = 1 + rep % 12;
        auto s = random_vector(gen, K);
        for (auto& v : s) v = (v - 0.5) * 40.0;
        for (double tau : {1e-4, 0.1, 1.0, 10.0}) {
            const auto q = select({SelectorKind::Softmax, tau, 0.1}, s);
            double sum = 0.0;
            for (double v : q) {
                REQUIRE(v >= 0.0);
                sum += v;
            }
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("jacobian matches central finite differences") {
    std::mt19937_64 gen(3);
    const double h = 1e-5;
    for (std::size_t K : {2u, 5u, 10u}) {
        for (int rep = 0; rep < 100; ++rep) {
            const auto s = random_vector(gen, K);
            const auto J = jacobian(kSoft1, s);
            for (std::size_t b = 0; b < K; ++b) {
                auto up = s, down = s;
                up[b] += h;
                down[b] -= h;
                const auto qu = select(kSoft1, up), qd = select(kSoft1, down);
                for (std::size_t a = 0; a < K; ++a) REQUIRE(std::abs((qu[a] - qd[a]) / (2 * h) - J[a * K + b]) <= 1e-6);
            }
        }
    }
}

TEST_CASE("jacobian rows and columns sum to zero") {
    std::mt19937_64 gen(4);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t K = 2 + rep % 9;
        const auto J = jacobian({SelectorKind::Softmax, 0.1 + rep * 0.01, 0.1}, random_vector(gen, K));
        for (std::size_t a = 0; a < K; ++a) {
            double row = 0.0, col = 0.0;
            for (std::size_t b = 0; b < K; ++b) {
                row += J[a * K + b];
                col += J[b * K + a];
            }
            CHECK(std::abs(row) <= 1e-10);
            CHECK(std::abs(col) <= 1e-10);
        }
    }
}

TEST_CASE("softmax is shift invariant") {
    std::mt19937_64 gen(5);
    for (int rep = 0; rep < 100; ++rep) {
        const auto s = random_vector(gen, 6);
        for (double c : {-3.0, 0.25, 100.0}) {
            auto shifted = s;
            for (auto& v : shifted) v += c;
            const auto q = select(kSoft1, s), qs = select(kSoft1, shifted);
            for (std::size_t k = 0; k < 6; ++k) CHECK(std::abs(q[k] - qs[k]) <= 1e-12);
        }
    }
}

TEST_CASE("small temperature approaches hard argmax") {
    std::mt19937_64 gen(6);
    const SelectorSpec cold{SelectorKind::Softmax, 1e-4, 0.1};
    for (int rep = 0; rep < 100; ++rep) {
        auto s = random_vector(gen, 5);
        const std::size_t w = argmax(s);
        // Keep a clear unique maximiser.
        s[w] += 0.01;
        const auto qs = select(cold, s), qh = select(kHard, s);
        for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(qs[k] - qh[k]) < 1e-6);
    }
}

TEST_CASE("adaptive resolution") {
    const SelectorSpec adaptive{SelectorKind::Adaptive, 0.1, 0.10};
    CHECK(resolve(adaptive, 0.0).kind == SelectorKind::Hard);
    CHECK(resolve(adaptive, 0.10).kind == SelectorKind::Hard);
    CHECK(resolve(adaptive, 0.2).kind == SelectorKind::Softmax);
    CHECK(resolve(adaptive, 0.2).tau == 0.1);
    CHECK(resolve(kHard, 0.9).kind == SelectorKind::Hard);
    CHECK(resolve(kSoft1, 0.0).kind == SelectorKind::Softmax);
}

TEST_CASE("names and JSON") {
    CHECK(parse_selector_kind("soft") == SelectorKind::Softmax);
    CHECK(parse_selector_kind("hard-argmax") == SelectorKind::Hard);
    CHECK(parse_selector_kind("adaptive") == SelectorKind::Adaptive);
    CHECK_THROWS_AS(parse_selector_kind("greedy"), Error);
    const SelectorSpec s{SelectorKind::Adaptive, 0.3, 0.2};
    CHECK(selector_from_json(nlohmann::json::parse(selector_to_json(s).dump())) == s);
    CHECK(selector_from_json(nlohmann::json::parse(R"({"kind":"softmax","tau":1.0})")).tau == 1.0);
}
