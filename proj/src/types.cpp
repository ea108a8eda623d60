#include "improbe/types.hpp"

#include "improbe/errors.hpp"
#include "improbe/text.hpp"

namespace improbe {

std::string_view to_string(Dimension d) noexcept {
  return d == Dimension::warmth ? "warmth" : "competence";
}

std::string_view to_string(Direction d) noexcept {
  return d == Direction::high ? "high" : "low";
}

std::string_view to_string(ActivationKind k) noexcept {
  switch (k) {
    case ActivationKind::mlp: return "mlp";
    case ActivationKind::residual: return "residual";
    case ActivationKind::z: return "z";
  }
  return "mlp";
}

Dimension parse_dimension(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "warmth") return Dimension::warmth;
  if (v == "competence") return Dimension::competence;
  fail(ErrorKind::invalid_argument, "unknown dimension '" + std::string(s) + "'");
}

Direction parse_direction(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "high") return Direction::high;
  if (v == "low") return Direction::low;
  fail(ErrorKind::invalid_argument, "unknown direction '" + std::string(s) + "'");
}

std::optional<Direction> parse_optional_direction(std::string_view s) {
  if (trim(s).empty()) return std::nullopt;
  return parse_direction(s);
}

ActivationKind parse_kind(std::string_view s) {
  const std::string v = ascii_lower(trim(s));
  if (v == "mlp") return ActivationKind::mlp;
  if (v == "residual") return ActivationKind::residual;
  if (v == "z") return ActivationKind::z;
  fail(ErrorKind::invalid_argument, "unknown activation kind '" + std::string(s) + "'");
}

}  // namespace improbe
