#pragma once

#include <string>

namespace crmlab {

// Bounded, piecewise-continuous reference input r(t).
struct ReferenceInput {
  enum class Kind { kZero, kStep, kSine };

  Kind kind = Kind::kStep;
  double amplitude = 1.0;
  double t_on = 0.0;       // step switch time
  double frequency = 1.0;  // Hz, sine only
  double offset = 0.0;

  double operator()(double t) const;
  double sup_norm() const;
  void validate() const;

  static Kind parse_kind(const std::string& name);
  static std::string kind_name(Kind kind);
};

}  // namespace crmlab
