#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "siren/score_store.hpp"

namespace siren::testing {

// Single-cell tensor from row-major rows[item][artifact].
inline ScoreTensor tensor_from_rows(const std::vector<std::vector<double>>& rows, std::string system = "S",
                                    std::string budget = "b1") {
    ScoreTensor t;
    const std::size_t M = rows.size(), K = rows.empty() ? 0 : rows.front().size();
    for (std::size_t i = 0; i < M; ++i) t.items.push_back("i" + std::to_string(i));
    t.budget_grid = {budget};
    Cell c;
    c.system = std::move(system);
    c.budget = std::move(budget);
    for (std::size_t k = 0; k < K; ++k) c.artifacts.push_back("a" + std::to_string(k));
    c.scores = ScoreMatrix(M, K);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t k = 0; k < K; ++k) c.scores(i, k) = rows[i][k];
    t.cells.push_back(std::move(c));
    return t;
}

inline ScoreTensor constant_tensor(std::size_t M, std::size_t K, double value) {
    return tensor_from_rows(std::vector<std::vector<double>>(M, std::vector<double>(K, value)));
}

// Random 0/1 (or fractional) scores with a per-artifact success rate.
inline ScoreMatrix random_scores(std::size_t M, std::size_t K, std::uint64_t seed, bool binary = true) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ScoreMatrix z(M, K);
    for (std::size_t k = 0; k < K; ++k) {
        const double p = 0.3 + 0.4 * u(gen);
        for (std::size_t i = 0; i < M; ++i) z(i, k) = binary ? (u(gen) < p ? 1.0 : 0.0) : u(gen);
    }
    return z;
}

// Grid of systems x budgets sharing one item pool, random scores.
inline ScoreTensor random_grid(std::size_t M, std::size_t n_systems, std::size_t n_budgets, std::size_t K,
                               std::uint64_t seed) {
    ScoreTensor t;
    for (std::size_t i = 0; i < M; ++i) t.items.push_back("i" + std::to_string(i));
    for (std::size_t b = 0; b < n_budgets; ++b) t.budget_grid.push_back(std::to_string(8 << b));
    for (std::size_t s = 0; s < n_systems; ++s)
        for (std::size_t b = 0; b < n_budgets; ++b) {
            Cell c;
            c.system = "sys" + std::to_string(s);
            c.budget = t.budget_grid[b];
            for (std::size_t k = 0; k < K; ++k) c.artifacts.push_back("a" + std::to_string(k));
            c.scores = random_scores(M, K, seed * 1000 + s * 10 + b);
            t.cells.push_back(std::move(c));
        }
    return t;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("siren-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace siren::testing
