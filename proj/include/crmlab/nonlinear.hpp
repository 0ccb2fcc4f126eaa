#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "crmlab/certificate.hpp"
#include "crmlab/integrator.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

// a sin(ω t + φ) + offset with analytic derivatives of any order.
struct SmoothSignal {
  double amplitude = 1.0;
  double omega = 1.0;  // rad/s
  double phase = 0.0;
  double offset = 0.0;

  double derivative(double t, int order) const;
  // (y, y', ..., y^(order)).
  Vec derivatives(double t, int order) const;
};

// ẋ_i = x_{i+1} + φ_i(x_1..x_i)ᵀθ*, ẋ_n = β(x)u + φ_n(x)ᵀθ*.
struct StrictFeedbackSystem {
  int n = 2;
  int p = 1;
  // φ_i for 1-based i, and its p×n Jacobian in x.
  std::function<Vec(int i, const Vec& x)> phi;
  std::function<Mat(int i, const Vec& x)> phi_jacobian;
  std::function<double(const Vec& x)> beta;
  Vec theta_star;
  SmoothSignal y_r;

  void validate() const;
};

// Built-in regressors (θ scalar): "x1_squared" has φ_1 = x_1² and φ_i = 0
// otherwise; "squares" has φ_i = x_i². β(x) = beta0 + beta1 x_1².
StrictFeedbackSystem strict_feedback_preset(const std::string& regressor, int n,
                                            double theta_star, double beta0 = 1.0,
                                            double beta1 = 0.0,
                                            SmoothSignal y_r = {});

struct BacksteppingDesign {
  Vec c;
  Mat Gamma;

  void validate(int n, int p) const;
  double c0() const { return c.minCoeff(); }
};

struct BacksteppingEval {
  double u = 0.0;
  Vec z;
  Vec alpha;  // α_1..α_n
  Mat W;      // p×n, columns w_i
  Vec tau;    // τ_n = W z
  Mat A_z;
};

// Tuning-function recursion at (x, θ) with yr = (y_r, ..., y_r^(n)).
// Partials of α_1 are closed form; those of α_2 (needed for n = 3) come from
// central differences with step 1e-6. Throws UnsupportedOrder, SingularBeta.
BacksteppingEval backstepping_design(const StrictFeedbackSystem& sys,
                                     const BacksteppingDesign& design,
                                     const Vec& theta, const Vec& x,
                                     const Vec& yr);

// Plant state with the given error coordinates z at estimate θ.
Vec state_from_z(const StrictFeedbackSystem& sys, const BacksteppingDesign& design,
                 const Vec& theta, const Vec& z, const Vec& yr);

struct BacksteppingScenario {
  std::string name = "backstepping";
  StrictFeedbackSystem system = strict_feedback_preset("x1_squared", 2, 1.0);
  BacksteppingDesign design{Vec::Constant(2, 2.0), Mat::Identity(1, 1)};
  Vec theta0 = Vec::Zero(1);
  Vec x0 = Vec::Zero(2);
  IntegratorConfig integrator = default_integrator();

  static IntegratorConfig default_integrator();
  void validate() const;
  // V = zᵀz/2 + θ̃ᵀΓ⁻¹θ̃/2.
  double lyapunov(const Vec& z, const Vec& theta) const;
  double initial_lyapunov() const;
};

// State: x (n), θ (p), ∫‖z‖².
VectorField backstepping_loop(const BacksteppingScenario& s);

// Channels: x_i, z_i, theta_j, u, V, int_z2, Az_ij.
Trajectory simulate_backstepping(const BacksteppingScenario& s);

// z_L2 (∫‖z‖² ≤ V(0)/c_0), V_nonincreasing and Az_skew_structure
// (max |A_z + A_zᵀ − diag(−2c)| over the recorded samples).
std::vector<BoundCertificate> certify_backstepping_run(const Trajectory& traj,
                                                       const BacksteppingScenario& s);

// Two-link planar arm with point masses at the link ends; gravity acts on
// angles measured from the horizontal. Parameters a = ((m1+m2)l1², m2 l2²,
// m2 l1 l2) with l1, l2 known.
struct RobotModel {
  double m1 = 1.0;
  double m2 = 1.0;
  double l1 = 1.0;
  double l2 = 1.0;
  double gravity = 9.81;

  void validate() const;
  Vec parameters() const;
  Mat H(const Vec& q) const;
  Mat C(const Vec& q, const Vec& qd) const;
  Vec g(const Vec& q) const;
  // Y a = H(q) q̈_r + C(q, q̇) q̇_r + g(q).
  Mat Y(const Vec& q, const Vec& qd, const Vec& qd_r, const Vec& qdd_r) const;
};

struct RobotController {
  Mat k_d = 10.0 * Mat::Identity(2, 2);
  double lambda = 5.0;
  Mat Gamma = 5.0 * Mat::Identity(3, 3);

  void validate() const;
};

// q_d(t) = (a1 sin(w1 t), a2 cos(w2 t)) by default: (sin t, cos 2t).
struct JointTrajectory {
  SmoothSignal q1{1.0, 1.0, 0.0, 0.0};
  SmoothSignal q2{1.0, 2.0, std::numbers::pi / 2.0, 0.0};

  Vec q(double t, int order) const;
};

struct RobotScenario {
  std::string name = "robot-2link";
  RobotModel model;
  RobotController controller;
  JointTrajectory desired;
  Vec q0 = Vec::Zero(2);
  Vec qd0 = Vec::Zero(2);
  Vec a_hat0 = Vec::Zero(3);
  IntegratorConfig integrator = default_integrator();

  static IntegratorConfig default_integrator();
  void validate() const;
};

// State: q (2), q̇ (2), â (3), ∫sᵀk_d s.
VectorField robot_loop(const RobotScenario& s);

// Channels: q_i, q_d_i, q_tilde_i, s_i, a_hat_j, tau_i, V, int_s_kd_s.
Trajectory simulate_robot(const RobotScenario& s);

// V_dissipation: max |ΔV/Δt + (Δ∫sᵀk_d s)/Δt| ≤ 1e-4, plus q_tilde_final.
std::vector<BoundCertificate> certify_robot_run(const Trajectory& traj,
                                                const RobotScenario& s);

// max |xᵀ(Ḣ − 2C)x| over `samples` random (q, q̇, x), Ḣ by a central
// difference along q̇.
double skew_symmetry_residual(const RobotModel& model, int samples,
                              std::uint64_t seed);

}  // namespace crmlab
