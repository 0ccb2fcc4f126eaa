#pragma once

#include <limits>
#include <string>
#include <vector>

#include "crmlab/certificate.hpp"
#include "crmlab/scalar_crm.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

struct TransientConstants {
  double b1 = 0.0;  // sqrt(e(0)² / 2|a_m|)
  double b2 = 0.0;  // sqrt(|θ̃̄(0)|² / 2|a_m|)
  double b3 = 0.0;  // b2 + |x_m^o|∞
  double b4 = 0.0;  // |e(0)| / (2 sqrt|a_m|)
  double b5 = 0.0;  // sqrt|k_p| Θ_max / (2 sqrt|a_m|)
  double theta_max = 0.0;
  double t1 = 0.0;
  double ell_star = 0.0;
  double delta = 1.1;
  double epsilon = 0.1;
  double a_m = -1.0;

  // 2(|x_m^o|∞ + |x_m(t1)| e^{-|a_m|(t - t1)})².
  double c1(double t, double xm_at_t1, double xmo_sup) const;
};

// Largest t for which exp((a_m + |k_p|Θ_max) s) <= delta and the forced
// response ∫_0^s exp(a (s-τ)) |k_p| Θ_max dτ <= epsilon hold for all s <= t.
// Requires projection. Returns +inf when both hold forever.
double select_t1(const ScalarScenario& scenario, double delta, double epsilon);

// exp(-|a_m+ℓ| t1) <= |a_m+ℓ|^{-1/2}.
bool ell_star_condition(double a_m, double ell, double t1);
// Largest ℓ <= 0 such that the condition holds for every ℓ' <= ℓ.
double ell_star(double a_m, double t1);

TransientConstants transient_constants(const ScalarScenario& scenario,
                                       double xmo_sup, double t1,
                                       double delta = 1.1,
                                       double epsilon = 0.1);

// sup_t |x_m - x_m^o|.
double delta_xm_sup(const Trajectory& traj);

// Scalar run certificates. Unprojected runs get the e, Δx_m,
// k̇ and θ̇ L2 bounds; projected runs get e bounds plus the pointwise V and e
// exponential envelopes. Both get the sample-to-sample V decrease.
// Throws MissingChannel.
std::vector<BoundCertificate> certify_scalar_run(const Trajectory& traj,
                                                 const ScalarScenario& scenario);

struct TailReport {
  std::vector<BoundCertificate> certificates;
  std::vector<Measurement> measurements;  // θ̇ tail, remainder estimate
};

// Tail (t >= t1) bounds for projected runs with γ = |ℓ| >= 1 and ℓ <= ℓ*.
// Throws PreconditionViolated.
TailReport truncated_certificates(const Trajectory& traj,
                                  const ScalarScenario& scenario, double t1);

struct PeakingFit {
  std::vector<double> ell_values;  // |ℓ|
  std::vector<double> peaks;       // sup |Δx_m|
  double exponent = 0.0;
  double intercept = 0.0;  // log a1
};

// Least-squares slope of log(peak) against log|ℓ|. Throws DegenerateFit.
PeakingFit fit_peaking_exponent(std::vector<double> ell_abs,
                                std::vector<double> peaks);

// Runs `base` at every ℓ (γ = |ℓ| when couple_gamma) and fits the exponent.
PeakingFit peaking_exponent(const ScalarScenario& base,
                            const std::vector<double>& ells,
                            bool couple_gamma);

struct OscillationMetrics {
  long zero_crossings = 0;  // sign changes of the derivative
  double l2_of_derivative = 0.0;
  double peak_frequency = 0.0;  // Hz
  double peak_amplitude = 0.0;
};

// Over [t_start, t_end] of a uniformly sampled channel. Throws
// MissingChannel.
OscillationMetrics oscillation_metrics(
    const Trajectory& traj, const std::string& channel, double t_start = 0.0,
    double t_end = std::numeric_limits<double>::infinity());

}  // namespace crmlab
