#pragma once

// Benchmark score tensor: per (system, budget) cell, an items x artifacts
// matrix of scores in [0, 1] over a shared, ordered item pool.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace siren {

// Dense column-major matrix; column k holds one artifact's scores over all items.
class ScoreMatrix {
public:
    ScoreMatrix() = default;
    ScoreMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t item, std::size_t artifact) noexcept {
        return data_[artifact * rows_ + item];
    }
    double operator()(std::size_t item, std::size_t artifact) const noexcept {
        return data_[artifact * rows_ + item];
    }

    std::span<double> column(std::size_t artifact) noexcept {
        return {data_.data() + artifact * rows_, rows_};
    }
    std::span<const double> column(std::size_t artifact) const noexcept {
        return {data_.data() + artifact * rows_, rows_};
    }

    std::span<const double> values() const noexcept { return data_; }

    friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct CellRef {
    std::string system;
    std::string budget;

    std::string label() const { return system + ":" + budget; }
    friend bool operator==(const CellRef&, const CellRef&) = default;
};

struct Cell {
    std::string system;
    std::string budget;
    std::vector<std::string> artifacts;       // frozen shortlist, K entries
    ScoreMatrix scores;                       // scoring-role scores (M x K)
    std::optional<ScoreMatrix> eval_scores;   // held-out-role scores when they differ

    CellRef ref() const { return {system, budget}; }
    std::size_t shortlist_size() const noexcept { return artifacts.size(); }
    bool dual_role() const noexcept { return eval_scores.has_value(); }
    const ScoreMatrix& scoring() const noexcept { return scores; }
    const ScoreMatrix& held_out() const noexcept { return eval_scores ? *eval_scores : scores; }

    friend bool operator==(const Cell&, const Cell&) = default;
};

// Immutable once built; safe to share read-only across threads.
struct ScoreTensor {
    std::vector<std::string> items;
    std::vector<std::string> budget_grid;
    std::vector<Cell> cells;

    std::size_t item_count() const noexcept { return items.size(); }
    std::optional<std::size_t> find(const CellRef& ref) const noexcept;
    // Throws UnknownCell.
    std::size_t index_of(const CellRef& ref) const;
    const Cell& at(const CellRef& ref) const { return cells[index_of(ref)]; }

    friend bool operator==(const ScoreTensor&, const ScoreTensor&) = default;
};

enum class ViolationKind {
    EmptyShortlist,
    InconsistentItems,
    OutOfRangeScore,
    ArtifactCountMismatch,
    DuplicateBudget,
    UnknownBudget,
    DuplicateCell,
    DuplicateItem,
    EmptyItemSet,
};

std::string_view to_string(ViolationKind kind) noexcept;

struct Violation {
    ViolationKind kind;
    std::string cell;      // "system:budget", empty for tensor-level problems
    std::string item;
    std::string artifact;
    std::string message;
};

// Never throws; empty result iff every tensor invariant holds.
std::vector<Violation> validate(const ScoreTensor& tensor);

// Throws the Error matching the first violation.
void require_valid(const ScoreTensor& tensor);

enum class TensorFormat { LongCsv, Json };

// Infers the format from the extension (.json -> Json, anything else -> LongCsv).
TensorFormat format_for(const std::filesystem::path& path);

ScoreTensor load_tensor(const std::filesystem::path& path, TensorFormat format);
ScoreTensor load_tensor(const std::filesystem::path& path);

// Long CSV: header item_id,system,budget,artifact[,role],score. Items,
// systems, artifacts and budgets are put in natural (numeric-aware) order so
// the row order of the file does not matter.
ScoreTensor parse_long_csv(std::istream& in);
void write_long_csv(const ScoreTensor& tensor, std::ostream& out);

ScoreTensor tensor_from_json(const nlohmann::json& doc);
nlohmann::ordered_json tensor_to_json(const ScoreTensor& tensor);

// Numeric-aware ordering: "item2" < "item10", "8" < "32".
bool natural_less(std::string_view a, std::string_view b) noexcept;

// Canonical long-CSV bytes and their 64-bit FNV-1a hash, as hex.
std::string canonical_bytes(const ScoreTensor& tensor);
std::string fingerprint(const ScoreTensor& tensor);

}  // namespace siren
