#include "siren/split_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "siren/error.hpp"
#include "siren/numeric.hpp"
#include "siren/parallel.hpp"
#include "siren/rng.hpp"

namespace siren {

std::string_view to_string(WeightRule rule) noexcept {
    return rule == WeightRule::Uniform ? "uniform" : "eval-size";
}

WeightRule parse_weight_rule(std::string_view text) {
    if (text == "uniform") return WeightRule::Uniform;
    if (text == "eval-size" || text == "eval_size") return WeightRule::EvalSize;
    throw Error(ErrorCode::InvalidArgument, "unknown weight rule '" + std::string(text) + "'");
}

Split make_split(std::size_t item_count, std::size_t score_size, std::uint64_t seed, std::size_t r) {
    std::vector<std::uint32_t> perm(item_count);
    std::iota(perm.begin(), perm.end(), 0u);
    CounterRng rng(derive_seed(seed, "split"), r);
    // Partial Fisher-Yates: the first score_size slots are a uniform subset.
    for (std::size_t i = 0; i < score_size; ++i) {
        const std::size_t j = i + rng.below(item_count - i);
        std::swap(perm[i], perm[j]);
    }
    Split s;
    s.score.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(score_size));
    s.eval.assign(perm.begin() + static_cast<std::ptrdiff_t>(score_size), perm.end());
    std::sort(s.score.begin(), s.score.end());
    std::sort(s.eval.begin(), s.eval.end());
    return s;
}

SplitDesign make_design(std::size_t item_count, std::size_t split_count, double rho_score, WeightRule rule,
                        std::uint64_t seed) {
    if (split_count == 0) throw Error(ErrorCode::InvalidArgument, "split count R must be at least 1");
    if (!(rho_score > 0.0 && rho_score < 1.0))
        throw Error(ErrorCode::InvalidArgument, "rho_score must lie in (0, 1)");
    if (item_count > 0xFFFFFFFFull) throw Error(ErrorCode::InvalidArgument, "too many items");
    const auto m = static_cast<std::size_t>(std::floor(rho_score * static_cast<double>(item_count)));
    if (m == 0 || m >= item_count)
        throw Error(ErrorCode::DegenerateSplit, "M=" + std::to_string(item_count) + " with rho_score=" +
                                                    std::to_string(rho_score) + " leaves an empty fold");

    SplitDesign d;
    d.seed = seed;
    d.rho_score = rho_score;
    d.weight_rule = rule;
    d.item_count = item_count;
    d.splits.resize(split_count);
    parallel_for(split_count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) d.splits[r] = make_split(item_count, m, seed, r);
    });

    d.weights.resize(split_count);
    if (rule == WeightRule::Uniform) {
        std::fill(d.weights.begin(), d.weights.end(), 1.0 / static_cast<double>(split_count));
    } else {
        std::vector<double> sizes(split_count);
        for (std::size_t r = 0; r < split_count; ++r) sizes[r] = static_cast<double>(d.splits[r].eval.size());
        const double total = pairwise_sum(sizes);
        for (std::size_t r = 0; r < split_count; ++r) d.weights[r] = sizes[r] / total;
    }
    return d;
}

std::vector<std::string> check_design(const SplitDesign& d) {
    std::vector<std::string> out;
    if (d.splits.empty()) out.push_back("design has no splits");
    if (d.weights.size() != d.splits.size()) out.push_back("weight count differs from split count");
    for (std::size_t r = 0; r < d.splits.size(); ++r) {
        const Split& s = d.splits[r];
        const std::string tag = "split " + std::to_string(r) + ": ";
        if (s.score.empty() || s.eval.empty()) out.push_back(tag + "empty fold");
        if (s.score.size() != d.splits.front().score.size() || s.eval.size() != d.splits.front().eval.size())
            out.push_back(tag + "fold sizes differ from split 0");
        std::vector<char> seen(d.item_count, 0);
        for (auto set : {&s.score, &s.eval}) {
            for (std::uint32_t i : *set) {
                if (i >= d.item_count) {
                    out.push_back(tag + "index " + std::to_string(i) + " out of range");
                } else if (seen[i]++) {
                    out.push_back(tag + "index " + std::to_string(i) + " appears twice");
                }
            }
        }
    }
    for (double w : d.weights)
        if (!(w >= 0.0)) out.push_back("negative or non-finite split weight");
    if (!d.weights.empty() && std::abs(pairwise_sum(d.weights) - 1.0) > 1e-12) out.push_back("weights do not sum to 1");
    return out;
}

nlohmann::ordered_json design_to_json(const SplitDesign& d) {
    nlohmann::ordered_json doc;
    doc["seed"] = d.seed;
    doc["rho_score"] = d.rho_score;
    doc["weight_rule"] = std::string(to_string(d.weight_rule));
    doc["item_count"] = d.item_count;
    doc["splits"] = nlohmann::ordered_json::array();
    for (const auto& s : d.splits) {
        nlohmann::ordered_json js;
        js["score"] = s.score;
        js["eval"] = s.eval;
        doc["splits"].push_back(std::move(js));
    }
    doc["weights"] = d.weights;
    return doc;
}

SplitDesign design_from_json(const nlohmann::json& doc) {
    try {
        SplitDesign d;
        d.seed = doc.at("seed").get<std::uint64_t>();
        d.rho_score = doc.at("rho_score").get<double>();
        if (doc.contains("weight_rule")) d.weight_rule = parse_weight_rule(doc.at("weight_rule").get<std::string>());
        for (const auto& js : doc.at("splits")) {
            Split s;
            s.score = js.at("score").get<std::vector<std::uint32_t>>();
            s.eval = js.at("eval").get<std::vector<std::uint32_t>>();
            d.splits.push_back(std::move(s));
        }
        d.weights = doc.at("weights").get<std::vector<double>>();
        if (doc.contains("item_count")) {
            d.item_count = doc.at("item_count").get<std::size_t>();
        } else if (!d.splits.empty()) {
            d.item_count = d.splits.front().score.size() + d.splits.front().eval.size();
        }
        if (auto problems = check_design(d); !problems.empty())
            throw Error(ErrorCode::InvalidArgument, "invalid split design: " + problems.front());
        return d;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

}  // namespace siren
