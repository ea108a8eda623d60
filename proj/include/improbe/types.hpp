#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace improbe {

// Stereotype Content Model axes.
enum class Dimension { warmth, competence };
enum class Direction { high, low };
enum class ActivationKind { mlp, residual, z };

std::string_view to_string(Dimension d) noexcept;
std::string_view to_string(Direction d) noexcept;
std::string_view to_string(ActivationKind k) noexcept;

// Parsers are case-insensitive and throw improbe::Error on unknown values.
Dimension parse_dimension(std::string_view s);
Direction parse_direction(std::string_view s);
ActivationKind parse_kind(std::string_view s);

// "" parses to nullopt; used for absent labels in CSV columns.
std::optional<Direction> parse_optional_direction(std::string_view s);

inline constexpr ActivationKind kAllKinds[] = {
    ActivationKind::mlp, ActivationKind::residual, ActivationKind::z};

}  // namespace improbe
