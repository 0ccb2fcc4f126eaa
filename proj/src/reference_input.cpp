#include "crmlab/reference_input.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crmlab/error.hpp"

namespace crmlab {

double ReferenceInput::operator()(double t) const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kStep:
      return offset + (t >= t_on ? amplitude : 0.0);
    case Kind::kSine:
      return offset + amplitude * std::sin(2.0 * std::numbers::pi * frequency * t);
  }
  return 0.0;
}

double ReferenceInput::sup_norm() const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kStep:
      return std::max(std::abs(offset), std::abs(offset + amplitude));
    case Kind::kSine:
      return std::abs(offset) + std::abs(amplitude);
  }
  return 0.0;
}

void ReferenceInput::validate() const {
  if (!std::isfinite(amplitude) || !std::isfinite(offset) ||
      !std::isfinite(t_on)) {
    throw Error(ErrorKind::kInvalidConfig, "reference input must be finite");
  }
  if (kind == Kind::kSine && !(frequency > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                "reference.frequency must be > 0 for a sine input");
  }
}

ReferenceInput::Kind ReferenceInput::parse_kind(const std::string& name) {
  if (name == "zero") return Kind::kZero;
  if (name == "step") return Kind::kStep;
  if (name == "sine") return Kind::kSine;
  throw Error(ErrorKind::kInvalidConfig,
              "reference.input must be one of zero|step|sine, got '" + name +
                  "'");
}

std::string ReferenceInput::kind_name(Kind kind) {
  switch (kind) {
    case Kind::kZero: return "zero";
    case Kind::kStep: return "step";
    case Kind::kSine: return "sine";
  }
  return "step";
}

}  // namespace crmlab
