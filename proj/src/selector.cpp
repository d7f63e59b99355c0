#include "siren/selector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "siren/error.hpp"

namespace siren {

std::string_view to_string(SelectorKind kind) noexcept {
    switch (kind) {
        case SelectorKind::Softmax: return "softmax";
        case SelectorKind::Hard: return "hard";
        case SelectorKind::Adaptive: return "adaptive";
    }
    return "unknown";
}

SelectorKind parse_selector_kind(std::string_view text) {
    if (text == "softmax" || text == "soft") return SelectorKind::Softmax;
    if (text == "hard" || text == "hard-argmax" || text == "argmax") return SelectorKind::Hard;
    if (text == "adaptive") return SelectorKind::Adaptive;
    throw Error(ErrorCode::InvalidArgument, "unknown selector kind '" + std::string(text) + "'");
}

void check_selector(const SelectorSpec& spec) {
    if (!(spec.tau > 0.0) || !std::isfinite(spec.tau))
        throw Error(ErrorCode::InvalidArgument, "selector temperature must be positive");
    if (!(spec.instability_threshold >= 0.0 && spec.instability_threshold <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "instability threshold must lie in [0, 1]");
}

SelectorSpec resolve(const SelectorSpec& spec, double pi_win) {
    if (spec.kind != SelectorKind::Adaptive) return spec;
    SelectorSpec out = spec;
    out.kind = pi_win <= spec.instability_threshold ? SelectorKind::Hard : SelectorKind::Softmax;
    return out;
}

std::size_t argmax(std::span<const double> s) noexcept {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (s[k] > s[best]) best = k;
    return best;
}

namespace {

void check_scores(std::span<const double> s) {
    if (s.empty()) throw Error(ErrorCode::InvalidArgument, "selector needs at least one artifact");
    for (double v : s)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteScore, "selector input is not finite");
}

}  // namespace

void select_into(const SelectorSpec& spec, std::span<const double> s, std::span<double> q) {
    check_scores(s);
    const std::size_t K = s.size();
    if (spec.kind == SelectorKind::Hard) {
        std::fill(q.begin(), q.begin() + static_cast<std::ptrdiff_t>(K), 0.0);
        q[argmax(s)] = 1.0;
        return;
    }
    const double top = s[argmax(s)];
    double total = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        q[k] = std::exp((s[k] - top) / spec.tau);
        total += q[k];
    }
    for (std::size_t k = 0; k < K; ++k) q[k] /= total;
}

std::vector<double> select(const SelectorSpec& spec, std::span<const double> s) {
    std::vector<double> q(s.size());
    select_into(spec, s, q);
    return q;
}

std::vector<double> jacobian(const SelectorSpec& spec, std::span<const double> s) {
    const std::size_t K = s.size();
    std::vector<double> q = select(spec, s);
    std::vector<double> J(K * K, 0.0);
    if (spec.kind == SelectorKind::Hard) return J;
    for (std::size_t a = 0; a < K; ++a) {
        for (std::size_t b = 0; b < K; ++b) {
            J[a * K + b] = ((a == b ? q[a] : 0.0) - q[a] * q[b]) / spec.tau;
        }
    }
    return J;
}

nlohmann::ordered_json selector_to_json(const SelectorSpec& spec) {
    nlohmann::ordered_json doc;
    doc["kind"] = std::string(to_string(spec.kind));
    doc["tau"] = spec.tau;
    doc["instability_threshold"] = spec.instability_threshold;
    return doc;
}

SelectorSpec selector_from_json(const nlohmann::json& doc) {
    SelectorSpec spec;
    try {
        if (doc.contains("kind")) spec.kind = parse_selector_kind(doc.at("kind").get<std::string>());
        if (doc.contains("tau")) spec.tau = doc.at("tau").get<double>();
        if (doc.contains("instability_threshold"))
            spec.instability_threshold = doc.at("instability_threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("selector: ") + e.what());
    }
    check_selector(spec);
    return spec;
}

}  // namespace siren
