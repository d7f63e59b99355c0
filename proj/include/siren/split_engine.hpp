#pragma once

// Repeated (scoring, held-out) partitions of the item pool.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace siren {

enum class WeightRule { Uniform, EvalSize };

std::string_view to_string(WeightRule rule) noexcept;
WeightRule parse_weight_rule(std::string_view text);

// Item positions are 0-based and sorted ascending within each set.
struct Split {
    std::vector<std::uint32_t> score;
    std::vector<std::uint32_t> eval;

    friend bool operator==(const Split&, const Split&) = default;
};

struct SplitDesign {
    std::uint64_t seed = 0;
    double rho_score = 0.5;
    WeightRule weight_rule = WeightRule::Uniform;
    std::size_t item_count = 0;
    std::vector<Split> splits;
    std::vector<double> weights;

    std::size_t split_count() const noexcept { return splits.size(); }

    friend bool operator==(const SplitDesign&, const SplitDesign&) = default;
};

// Split r of a design with this (M, m, seed): a uniformly random m-subset
// of the items goes to scoring, the complement to held-out. Depends only on
// (seed, r), never on other splits.
Split make_split(std::size_t item_count, std::size_t score_size, std::uint64_t seed, std::size_t r);

// m = floor(rho_score * M), l = M - m. Throws DegenerateSplit if either is 0
// and InvalidArgument for R = 0 or rho outside (0, 1).
SplitDesign make_design(std::size_t item_count, std::size_t split_count, double rho_score, WeightRule rule,
                        std::uint64_t seed);

// Invariant violations (disjointness, equal sizes, range, weight sum); empty if valid.
std::vector<std::string> check_design(const SplitDesign& design);

nlohmann::ordered_json design_to_json(const SplitDesign& design);
SplitDesign design_from_json(const nlohmann::json& doc);

}  // namespace siren
