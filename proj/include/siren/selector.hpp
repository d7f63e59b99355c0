#pragma once

// Maps a shortlist's scoring-set means to deployment weights on the simplex.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace siren {

enum class SelectorKind { Softmax, Hard, Adaptive };

std::string_view to_string(SelectorKind kind) noexcept;
// Accepts softmax|soft, hard|hard-argmax|argmax, adaptive.
SelectorKind parse_selector_kind(std::string_view text);

struct SelectorSpec {
    SelectorKind kind = SelectorKind::Softmax;
    double tau = 1.0;                      // softmax temperature
    double instability_threshold = 0.10;   // adaptive: hard iff pi_win <= threshold

    friend bool operator==(const SelectorSpec&, const SelectorSpec&) = default;
};

// Throws InvalidArgument unless tau > 0 and the threshold lies in [0, 1].
void check_selector(const SelectorSpec& spec);

// Concrete selector for a cell with winner instability pi_win. Softmax and
// hard specs come back unchanged.
SelectorSpec resolve(const SelectorSpec& spec, double pi_win);

// Index of the first maximum.
std::size_t argmax(std::span<const double> s) noexcept;

// Softmax: exp((s_k - max s) / tau), normalised. Hard: unit mass on the first
// maximiser. An unresolved adaptive spec selects like softmax.
// Throws NonFiniteScore for non-finite input and InvalidArgument for K = 0.
std::vector<double> select(const SelectorSpec& spec, std::span<const double> s);
void select_into(const SelectorSpec& spec, std::span<const double> s, std::span<double> q);

// Row-major K x K Jacobian of select at s: (diag(q) - q q^T) / tau for
// softmax, the zero matrix for hard argmax.
std::vector<double> jacobian(const SelectorSpec& spec, std::span<const double> s);

nlohmann::ordered_json selector_to_json(const SelectorSpec& spec);
SelectorSpec selector_from_json(const nlohmann::json& doc);

}  // namespace siren
