#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crmlab/integrator.hpp"
#include "crmlab/projection.hpp"
#include "crmlab/reference_input.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

// x_p' = a_p x_p + k_p u, with a_p unknown and only sgn(k_p) known.
struct ScalarPlant {
  double a_p = 1.0;
  double k_p = 2.0;
  void validate() const;
};

// x_m' = a_m x_m + k_m r - ell (x_p - x_m); ell = 0 is the open-loop model.
struct ReferenceModel {
  double a_m = -1.0;
  double k_m = 1.0;
  double ell = 0.0;
  void validate() const;
};

struct AdaptationConfig {
  double gamma = 100.0;
  double theta0 = 0.0;  // feedback gain θ(0)
  double k0 = 0.0;      // feedforward gain k(0)
  std::optional<ProjectionSet> projection;
  void validate() const;
};

struct MatchedGains {
  double theta_star = 0.0;
  double k_star = 0.0;
  Vec as_vector() const;
};

// ((a_m - a_p)/k_p, k_m/k_p). Throws ZeroInputGain.
MatchedGains matched_gains(const ScalarPlant& plant, const ReferenceModel& ref);

// V = e²/2 + |k_p|/(2γ) |θ̄ - θ̄*|².
double lyapunov_v(double e, const Vec& theta_bar, const ScalarPlant& plant,
                  const AdaptationConfig& adapt, const MatchedGains& gains);

// Closed loop over (x_p, x_m, x_m^o, θ, k) plus three running integrals
// (∫e², ∫θ̇², ∫k̇²) used by the certificates.
class ScalarCrmLoop {
 public:
  enum Index : Eigen::Index {
    kXp = 0,
    kXm,
    kXmo,
    kTheta,
    kK,
    kIntE2,
    kIntThetaDot2,
    kIntKDot2,
    kStateSize
  };

  ScalarCrmLoop(ScalarPlant plant, ReferenceModel ref, AdaptationConfig adapt,
                ReferenceInput input);

  void rhs(double t, const Vec& x, Vec& dxdt) const;
  VectorField vector_field() const;
  Vec initial_state(double x_p0, double x_m0) const;
  // (θ̇, k̇) at state x, projected if configured.
  Vec parameter_rate(double t, const Vec& x) const;

  const ScalarPlant& plant() const { return plant_; }
  const ReferenceModel& reference() const { return ref_; }
  const AdaptationConfig& adaptation() const { return adapt_; }
  const ReferenceInput& input() const { return input_; }

 private:
  ScalarPlant plant_;
  ReferenceModel ref_;
  AdaptationConfig adapt_;
  ReferenceInput input_;
  double sign_kp_;
};

// Closed-loop vector field without constructing a ScalarCrmLoop.
VectorField crm_loop(const ScalarPlant& plant, const ReferenceModel& ref,
                     const AdaptationConfig& adapt, const ReferenceInput& r);

struct ScalarScenario {
  std::string name = "scalar";
  ScalarPlant plant;
  ReferenceModel ref;
  AdaptationConfig adapt;
  ReferenceInput input;
  double x_p0 = 1.0;
  double x_m0 = 0.0;  // x_m^o(0) = x_m(0)
  IntegratorConfig integrator;

  // Validates every block plus projection coverage of θ̄* and θ̄(0) and the
  // fixed-step rule. Throws InvalidConfig / ZeroInputGain.
  void validate() const;
  MatchedGains truth() const { return matched_gains(plant, ref); }
  double initial_lyapunov() const;
  double initial_error() const { return x_p0 - x_m0; }
  // |θ̄(0) - θ̄*|.
  double initial_parameter_error() const;
};

// Channel order written to CSV.
const std::vector<std::string>& scalar_channels();

// Runs the scenario. Channels: t, x_p, x_m, x_m_o, e, theta, k, u, V followed
// by r, theta_dot, k_dot, int_e2, int_theta_dot2, int_k_dot2.
Trajectory simulate_scalar(const ScalarScenario& scenario);

}  // namespace crmlab
