#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "crmlab/trajectory.hpp"

namespace crmlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class Method { kRk4, kRk45 };

std::string to_string(Method method);
Method parse_method(const std::string& name);

struct IntegratorConfig {
  Method method = Method::kRk45;
  // Fixed step (RK4) or initial step hint (RK45).
  double dt = 1e-3;
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double dt_max = 0.01;
  double horizon = 15.0;
  double record_dt = 0.01;
  // When > 0, no step crosses a multiple of hold_period. Used by loops with
  // zero-order-held inputs so that every step sees one held value.
  double hold_period = 0.0;

  // Throws InvalidConfig.
  void validate() const;
  // Number of record intervals; the effective horizon is
  // record_count() * record_dt.
  long record_count() const;
  std::string describe() const;
};

// Fixed-step safety rule for fast error modes: dt <= 0.1 / max(1, gains...).
// Throws InvalidConfig when RK4 is selected and the rule is violated.
void check_fixed_step_rule(const IntegratorConfig& cfg, double fastest_gain);

using VectorField =
    std::function<void(double t, const Vec& x, Vec& dxdt)>;
// Invoked before each step attempt with the step interval.
using StepHook = std::function<void(double t_begin, double t_end)>;

struct StateHistory {
  std::vector<double> times;
  std::vector<Vec> states;
};

// Integrates on [0, record_count()*record_dt] and returns the state at every
// record time. Deterministic: identical inputs give bit-identical output.
// Throws Divergence (non-finite state) or StepUnderflow (RK45 step below
// the minimum resolvable step).
StateHistory integrate_states(const VectorField& rhs, const Vec& x0,
                              const IntegratorConfig& cfg,
                              const StepHook& hook = {});

// Same as integrate_states, packaged as a Trajectory. Channels default to
// x0, x1, ... when `names` is empty.
Trajectory integrate(const VectorField& rhs, const Vec& x0,
                     const IntegratorConfig& cfg,
                     std::vector<std::string> names = {},
                     std::string meta = {});

}  // namespace crmlab
