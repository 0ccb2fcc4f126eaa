#include "crmlab/scalar_crm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crmlab/error.hpp"

namespace crmlab {

void ScalarPlant::validate() const {
  if (k_p == 0.0 || !std::isfinite(k_p)) {
    throw Error(ErrorKind::kZeroInputGain, "plant.k_p must be nonzero");
  }
  if (!std::isfinite(a_p)) {
    throw Error(ErrorKind::kInvalidConfig, "plant.a_p must be finite");
  }
}

void ReferenceModel::validate() const {
  if (!(a_m < 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "reference.a_m must be < 0");
  }
  if (!(ell <= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                "reference.ell must be <= 0 (got " + format_double(ell) + ")");
  }
  if (!std::isfinite(k_m)) {
    throw Error(ErrorKind::kInvalidConfig, "reference.k_m must be finite");
  }
}

void AdaptationConfig::validate() const {
  if (!(gamma > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "adaptation.gamma must be > 0");
  }
  if (projection) {
    projection->validate();
    Vec theta(2);
    theta << theta0, k0;
    if (theta.norm() > projection->theta_bound + 1e-9) {
      throw Error(ErrorKind::kInvalidConfig,
                  "initial parameters lie outside the projection set");
    }
  }
}

Vec MatchedGains::as_vector() const {
  Vec v(2);
  v << theta_star, k_star;
  return v;
}

MatchedGains matched_gains(const ScalarPlant& plant, const ReferenceModel& ref) {
  if (plant.k_p == 0.0) {
    throw Error(ErrorKind::kZeroInputGain, "k_p = 0 admits no matching gains");
  }
  return {(ref.a_m - plant.a_p) / plant.k_p, ref.k_m / plant.k_p};
}

double lyapunov_v(double e, const Vec& theta_bar, const ScalarPlant& plant,
                  const AdaptationConfig& adapt, const MatchedGains& gains) {
  const Vec err = theta_bar - gains.as_vector();
  return 0.5 * e * e +
         std::abs(plant.k_p) / (2.0 * adapt.gamma) * err.squaredNorm();
}

ScalarCrmLoop::ScalarCrmLoop(ScalarPlant plant, ReferenceModel ref,
                             AdaptationConfig adapt, ReferenceInput input)
    : plant_(plant),
      ref_(ref),
      adapt_(std::move(adapt)),
      input_(input),
      sign_kp_(plant.k_p > 0.0 ? 1.0 : -1.0) {
  plant_.validate();
  ref_.validate();
  adapt_.validate();
}

Vec ScalarCrmLoop::parameter_rate(double t, const Vec& x) const {
  const double r = input_(t);
  const double e = x[kXp] - x[kXm];
  Vec raw(2);
  raw << -adapt_.gamma * sign_kp_ * e * x[kXp],
      -adapt_.gamma * sign_kp_ * e * r;
  if (!adapt_.projection) return raw;
  Vec theta(2);
  theta << x[kTheta], x[kK];
  return project_unchecked(raw, theta, *adapt_.projection);
}

void ScalarCrmLoop::rhs(double t, const Vec& x, Vec& dxdt) const {
  const double r = input_(t);
  const double xp = x[kXp];
  const double e = xp - x[kXm];
  const double u = x[kTheta] * xp + x[kK] * r;
  const Vec rate = parameter_rate(t, x);

  dxdt.resize(kStateSize);
  dxdt[kXp] = plant_.a_p * xp + plant_.k_p * u;
  dxdt[kXm] = ref_.a_m * x[kXm] + ref_.k_m * r - ref_.ell * e;
  dxdt[kXmo] = ref_.a_m * x[kXmo] + ref_.k_m * r;
  dxdt[kTheta] = rate[0];
  dxdt[kK] = rate[1];
  dxdt[kIntE2] = e * e;
  dxdt[kIntThetaDot2] = rate[0] * rate[0];
  dxdt[kIntKDot2] = rate[1] * rate[1];
}

VectorField ScalarCrmLoop::vector_field() const {
  return [loop = *this](double t, const Vec& x, Vec& dxdt) {
    loop.rhs(t, x, dxdt);
  };
}

Vec ScalarCrmLoop::initial_state(double x_p0, double x_m0) const {
  Vec x0 = Vec::Zero(kStateSize);
  x0[kXp] = x_p0;
  x0[kXm] = x_m0;
  x0[kXmo] = x_m0;
  x0[kTheta] = adapt_.theta0;
  x0[kK] = adapt_.k0;
  return x0;
}

VectorField crm_loop(const ScalarPlant& plant, const ReferenceModel& ref,
                     const AdaptationConfig& adapt, const ReferenceInput& r) {
  return ScalarCrmLoop(plant, ref, adapt, r).vector_field();
}

void ScalarScenario::validate() const {
  plant.validate();
  ref.validate();
  adapt.validate();
  input.validate();
  integrator.validate();
  if (!std::isfinite(x_p0) || !std::isfinite(x_m0)) {
    throw Error(ErrorKind::kInvalidConfig, "initial states must be finite");
  }
  if (adapt.projection) {
    const double star = truth().as_vector().norm();
    if (star > adapt.projection->theta_bound) {
      throw Error(ErrorKind::kInvalidConfig,
                  "projection.theta_bound=" +
                      format_double(adapt.projection->theta_bound) +
                      " does not contain the matched gains (norm " +
                      format_double(star) + ")");
    }
  }
  check_fixed_step_rule(integrator,
                        std::max(adapt.gamma, std::abs(ref.ell)));
}

double ScalarScenario::initial_lyapunov() const {
  Vec theta(2);
  theta << adapt.theta0, adapt.k0;
  return lyapunov_v(initial_error(), theta, plant, adapt, truth());
}

double ScalarScenario::initial_parameter_error() const {
  Vec theta(2);
  theta << adapt.theta0, adapt.k0;
  return (theta - truth().as_vector()).norm();
}

const std::vector<std::string>& scalar_channels() {
  static const std::vector<std::string> names = {
      "x_p",       "x_m",    "x_m_o",  "e",
      "theta",     "k",      "u",      "V",
      "r",         "theta_dot", "k_dot", "int_e2",
      "int_theta_dot2", "int_k_dot2"};
  return names;
}

Trajectory simulate_scalar(const ScalarScenario& scenario) {
  scenario.validate();
  const ScalarCrmLoop loop(scenario.plant, scenario.ref, scenario.adapt,
                           scenario.input);
  const MatchedGains gains = scenario.truth();
  const StateHistory hist =
      integrate_states(loop.vector_field(),
                       loop.initial_state(scenario.x_p0, scenario.x_m0),
                       scenario.integrator);

  std::ostringstream meta;
  meta << scenario.name << "; " << scenario.integrator.describe();
  Trajectory traj(scalar_channels(), meta.str());
  std::vector<double> row(scalar_channels().size());
  using L = ScalarCrmLoop;
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    const double t = hist.times[k];
    const Vec& x = hist.states[k];
    const double r = scenario.input(t);
    const double e = x[L::kXp] - x[L::kXm];
    Vec theta_bar(2);
    theta_bar << x[L::kTheta], x[L::kK];
    const Vec rate = loop.parameter_rate(t, x);
    row = {x[L::kXp],
           x[L::kXm],
           x[L::kXmo],
           e,
           x[L::kTheta],
           x[L::kK],
           x[L::kTheta] * x[L::kXp] + x[L::kK] * r,
           lyapunov_v(e, theta_bar, scenario.plant, scenario.adapt, gains),
           r,
           rate[0],
           rate[1],
           x[L::kIntE2],
           x[L::kIntThetaDot2],
           x[L::kIntKDot2]};
    traj.append(t, row);
  }
  return traj;
}

}  // namespace crmlab
