#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crmlab/certificate.hpp"
#include "crmlab/integrator.hpp"
#include "crmlab/projection.hpp"
#include "crmlab/reference_input.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

// x_p' = A x_p + B Λ u with Λ symmetric positive definite, eigenvalues <= λ̄.
struct MimoPlant {
  Mat A;
  Mat B;
  Mat Lambda;
  double lambda_bar = 1.0;
  void validate() const;
  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
};

// x_m' = A_m x_m + B r - L e with L = -A_m + g I and P = I/2.
struct MimoReference {
  Mat A_m;
  double g = -10.0;
  // Optional explicit L; must equal -A_m + g I.
  std::optional<Mat> L_override;

  Mat L() const;
  Mat P() const;
  Mat Q() const;
  // Throws InvalidConfig (A_m not Hurwitz, g >= 0) or AssumptionViolated.
  void validate(Eigen::Index n) const;
};

// ‖(A_m+L)ᵀP + P(A_m+L) + Q‖_F; exactly zero under the P = I/2 choice.
double lyapunov_residual(const MimoReference& ref);

struct MimoMatch {
  Mat Theta_star;  // m x n
  Mat K_star;      // m x m
  double residual = 0.0;
};

// Least-squares Θ* from A + BΛΘ* = A_m, K* = Λ⁻¹. Throws NoMatch.
MimoMatch mimo_matched_gains(const MimoPlant& plant, const Mat& A_m);

struct MimoAdaptation {
  double gamma = 10.0;  // Γ = γ I
  Mat Theta0;           // empty means zeros
  Mat K0;               // empty means identity
  std::optional<ProjectionSet> theta_projection;  // Frobenius ball
  std::optional<ProjectionSet> k_projection;
};

struct DecayEnvelope {
  double a1 = 1.0;
  double a2 = 1.0;
};

Mat matrix_exponential(const Mat& M);
// a2 = 0.9 |max Re eig(A_m)|; a1 = max ‖e^{A_m t}‖₂ e^{a2 t} over `samples`
// points of [0, 20/a2]. Throws InvalidConfig when A_m is not Hurwitz.
DecayEnvelope decay_envelope(const Mat& A_m, int samples = 400);
// ‖e^{A_m t}‖₂ <= a1 e^{-a2 t} (relative slack 1e-12) at every sample.
bool verify_decay_envelope(const Mat& A_m, const DecayEnvelope& env,
                           int samples = 400);

struct MimoScenario {
  std::string name = "mimo";
  MimoPlant plant;
  MimoReference ref;
  MimoAdaptation adapt;
  std::vector<ReferenceInput> inputs;  // one per input channel
  Vec x_p0;
  Vec x_m0;  // also x_m^o(0)
  IntegratorConfig integrator;

  void validate() const;
  MimoMatch truth() const { return mimo_matched_gains(plant, ref.A_m); }
  Mat theta0() const;
  Mat k0() const;
  Vec input(double t) const;
  double input_sup() const;  // sup_t ‖r(t)‖
  double initial_lyapunov() const;
};

// Closed loop over (x_p, x_m, x_m^o, Θ, K) plus ∫‖e‖², ∫‖Θ̇‖², ∫‖K̇‖².
class MimoCrmLoop {
 public:
  explicit MimoCrmLoop(const MimoScenario& scenario);

  void rhs(double t, const Vec& x, Vec& dxdt) const;
  VectorField vector_field() const;
  Vec initial_state() const;
  Eigen::Index state_size() const { return size_; }

  Vec x_p(const Vec& x) const { return x.segment(0, n_); }
  Vec x_m(const Vec& x) const { return x.segment(n_, n_); }
  Vec x_m_o(const Vec& x) const { return x.segment(2 * n_, n_); }
  Mat Theta(const Vec& x) const;
  Mat K(const Vec& x) const;
  double int_e2(const Vec& x) const { return x[off_int_]; }
  double int_theta_dot2(const Vec& x) const { return x[off_int_ + 1]; }
  double int_k_dot2(const Vec& x) const { return x[off_int_ + 2]; }
  double lyapunov(const Vec& x) const;

 private:
  MimoScenario s_;
  MimoMatch truth_;
  Mat L_;
  Mat BL_;
  Eigen::Index n_, m_, off_theta_, off_k_, off_int_, size_;
};

// V = eᵀPe + (1/γ) Tr(Θ̃ᵀΛΘ̃) + (1/γ) Tr(K̃ᵀΛK̃).
double mimo_lyapunov(const Vec& e, const Mat& Theta, const Mat& K,
                     const MimoPlant& plant, const MimoAdaptation& adapt,
                     const MimoMatch& truth);

// Channels: x_p_i, x_m_i, x_m_o_i, e_i, Theta_ij, K_ij, V, then e_norm,
// int_e2, int_Theta_dot2, int_K_dot2 (1-based indices).
Trajectory simulate_mimo(const MimoScenario& scenario);

struct MimoCertification {
  std::vector<BoundCertificate> certificates;
  std::vector<Measurement> measurements;
  DecayEnvelope envelope;
};

// Certificates: e L2, V decrease, discrete V̇ <= -|g|‖e‖², and with t2 the
// Gronwall envelope, e tail, x_m tail and K̇ tail. Θ̇ tail is reported as a
// measurement. Requires projection on both matrices, γ = |g| and
// exp(-|g| t2) <= |g|^{-1/2}; throws PreconditionViolated otherwise.
MimoCertification certify_mimo_run(const Trajectory& traj,
                                   const MimoScenario& scenario, double t2);

// 2-state demo: A = [[0,1],[-1,-2]], B = [0;1], Λ = 1, A_m = [[0,1],[-4,-4]],
// γ = |g|, Θ(0) = 0, K(0) = I, x_p(0) = x_m(0) = 0, unit step.
MimoScenario mimo_demo_scenario(double gamma = 100.0);

}  // namespace crmlab
