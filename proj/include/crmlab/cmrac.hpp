#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crmlab/certificate.hpp"
#include "crmlab/integrator.hpp"
#include "crmlab/projection.hpp"
#include "crmlab/scalar_crm.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

// Clamped Gaussian sensor noise, zero-order held at `rate` Hz. Sample k is a
// pure function of (seed, k), so evaluation needs no state.
struct NoiseModel {
  bool enabled = true;
  std::uint64_t seed = 42;
  double rate = 100.0;
  double raw_variance = 1.0;
  double clamp = 0.1;

  void validate() const;
  // Held sample index for time t: floor(t * rate + 1e-9).
  long index(double t) const;
  double sample(long k) const;
};

// n(t); zero when disabled.
double noise_signal(const NoiseModel& model, double t);

// Region 1: r = 0 on [0, t_switch). Region 2: a step of `amplitude` at
// t_switch through a first-order filter with time constant filter_tau
// (0 feeds the raw step).
struct RegionSchedule {
  double t_switch = 4.0;
  double amplitude = 1.0;
  double filter_tau = 0.5;

  void validate() const;
  double command(double t) const;
};

enum class CmracVariant { kCmrac, kCmracCo };

std::string to_string(CmracVariant v);
CmracVariant parse_variant(const std::string& name);

struct CmracConfig {
  std::string name = "cmrac-co";
  CmracVariant variant = CmracVariant::kCmracCo;
  ScalarPlant plant{1.0, 1.0};
  double a_m = -1.0;
  double k_m = 1.0;
  double ell = -10.0;
  double gamma = 100.0;
  double eta = 1.0;
  std::optional<ProjectionSet> projection = ProjectionSet{};
  RegionSchedule regions;
  NoiseModel noise;
  double x_a0 = 1.0;
  double x_m0 = 0.0;
  double x_o0 = 0.0;
  double theta0 = 0.0;
  double theta_hat0 = 0.0;
  IntegratorConfig integrator = default_integrator();

  static IntegratorConfig default_integrator();

  // Throws InvalidConfig, ZeroInputGain, UnstableGain.
  void validate() const;
  double theta_star() const { return (a_m - plant.a_p) / plant.k_p; }
  double k_star() const { return k_m / plant.k_p; }
  // a_m + ℓ + |k_p θ*|.
  double g_theta() const;
  // a_m + ℓ + 2|k_p θ*|.
  double g_n() const;
  // Largest eigenvalue of the (e_m, e_o) quadratic form in V̇ for the
  // observer as implemented.
  double g_rate() const;
  double theta_max() const;
  bool noisy() const { return noise.enabled; }
};

// Shared by every loop: V = (e_m² + e_o² + |k_p|/γ (θ̃² + θ̄²)) / 2.
double cmrac_lyapunov(double e_m, double e_o, double theta, double theta_hat,
                      const CmracConfig& cfg);

// Closed loop over (x_a, x_m or x_m^o, x_o, θ, θ̂, r filter) and running
// integrals of e_m², e_o², ε_θ², θ̇², θ̂̇². Noise and the region command are
// held per step through step_hook().
class CmracLoop {
 public:
  enum Index : Eigen::Index {
    kXa = 0,
    kXm,
    kXo,
    kTheta,
    kThetaHat,
    kFilter,
    kIntEm2,
    kIntEo2,
    kIntEps2,
    kIntThetaDot2,
    kIntThetaHatDot2,
    kStateSize
  };

  struct Signals {
    double x_p, e_m, e_o, eps, r, u, theta_dot, theta_hat_dot;
  };

  explicit CmracLoop(CmracConfig cfg);

  // Signals for state x with held noise n and command c.
  Signals signals(const Vec& x, double n, double c) const;
  void rhs(const Vec& x, double n, double c, Vec& dxdt) const;
  VectorField vector_field() const;
  StepHook step_hook() const;
  Vec initial_state() const;
  const CmracConfig& config() const { return cfg_; }

 private:
  struct Held {
    double noise = 0.0;
    double command = 0.0;
  };
  CmracConfig cfg_;
  std::shared_ptr<Held> held_;
};

VectorField cmracco_loop(const CmracConfig& cfg);

const std::vector<std::string>& cmrac_channels(CmracVariant v);

// Channels: t, x_a, x_p_measured, x_m (x_m_o for CMRAC), x_o, e_m, e_o,
// eps_theta, theta, theta_hat, u, du_dt, V, r, n, then theta_dot,
// theta_hat_dot and the running integrals. du_dt is the forward difference
// on the record grid.
Trajectory simulate_cmrac(const CmracConfig& cfg);

struct VariantSummary {
  std::string variant;
  double max_du_dt_region2 = 0.0;
  double l2_du_dt_region2 = 0.0;
  double max_e_region1 = 0.0;
  double l2_e_region1 = 0.0;
  double max_e_region2 = 0.0;
  double l2_e_region2 = 0.0;
};

VariantSummary summarize_variant(const Trajectory& traj,
                                 const CmracConfig& cfg);

struct ComparisonReport {
  VariantSummary cmrac;
  VariantSummary cmrac_co;
  // CMRAC-CO wins iff its Region-2 max |Δu/Δt| is strictly smaller.
  bool cmrac_co_wins = false;
};

// Runs both variants. Throws MismatchedScenarios unless the configs differ
// only in variant (one of each).
ComparisonReport compare_variants(const CmracConfig& cmrac,
                                  const CmracConfig& cmrac_co);

struct CmracCertification {
  std::vector<BoundCertificate> certificates;
  std::vector<Measurement> measurements;
};

// Noiseless runs: V monotonicity, Gronwall envelope and tail L2 bounds on
// e_m, e_o, ε_θ over [t3, T]. Noisy runs: the g_n envelope with ‖ξ‖∞ from a
// 3-sample moving average of the held noise (marked approximate).
// Throws PreconditionViolated for the CMRAC variant or without projection.
CmracCertification certify_cmracco_run(const Trajectory& traj,
                                       const CmracConfig& cfg, double t3);

// ℓ² / g_θ², which tends to 1 as ℓ → -∞.
double ell_gain_ratio(const CmracConfig& cfg);

// ‖ξ‖∞ with ξ = ṅ - a_p n over [0, horizon], n smoothed by a 3-sample moving
// average before differencing.
double noise_xi_sup(const NoiseModel& model, double a_p, double horizon);

}  // namespace crmlab
