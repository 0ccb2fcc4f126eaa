#include "crmlab/cmrac.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "crmlab/error.hpp"
#include "crmlab/signal_ops.hpp"

namespace crmlab {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// i-th output of a splitmix64 stream started at `seed`.
std::uint64_t splitmix64(std::uint64_t seed, std::uint64_t i) {
  std::uint64_t z = seed + (i + 1) * kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

double unit_closed(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

Vec scalar(double v) {
  Vec out(1);
  out << v;
  return out;
}

double sign_of(double v) { return v > 0.0 ? 1.0 : -1.0; }

}  // namespace

void NoiseModel::validate() const {
  if (!(rate > 0.0)) throw Error(ErrorKind::kInvalidConfig, "noise.rate must be > 0");
  if (!(raw_variance >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "noise.raw_variance must be >= 0");
  }
  if (!(clamp >= 0.0)) throw Error(ErrorKind::kInvalidConfig, "noise.clamp must be >= 0");
}

long NoiseModel::index(double t) const {
  return static_cast<long>(std::floor(t * rate + 1e-9));
}

double NoiseModel::sample(long k) const {
  const auto i = static_cast<std::uint64_t>(k);
  const double u1 = unit_open(splitmix64(seed, 2 * i));
  const double u2 = unit_closed(splitmix64(seed, 2 * i + 1));
  const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return std::clamp(std::sqrt(raw_variance) * g, -clamp, clamp);
}

double noise_signal(const NoiseModel& model, double t) {
  if (!model.enabled) return 0.0;
  return model.sample(model.index(std::max(t, 0.0)));
}

void RegionSchedule::validate() const {
  if (!(t_switch >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "regions.t_switch must be >= 0");
  }
  if (!(filter_tau >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "regions.filter_tau must be >= 0");
  }
  if (!std::isfinite(amplitude)) {
    throw Error(ErrorKind::kInvalidConfig, "regions.amplitude must be finite");
  }
}

double RegionSchedule::command(double t) const {
  return t + 1e-9 >= t_switch ? amplitude : 0.0;
}

std::string to_string(CmracVariant v) {
  return v == CmracVariant::kCmrac ? "cmrac" : "cmrac-co";
}

CmracVariant parse_variant(const std::string& name) {
  if (name == "cmrac") return CmracVariant::kCmrac;
  if (name == "cmrac-co" || name == "cmrac_co") return CmracVariant::kCmracCo;
  throw Error(ErrorKind::kInvalidConfig, "unknown variant '" + name + "'");
}

IntegratorConfig CmracConfig::default_integrator() {
  IntegratorConfig cfg;
  cfg.method = Method::kRk4;
  cfg.dt = 1e-3;
  cfg.horizon = 15.0;
  cfg.record_dt = 0.01;
  cfg.hold_period = 0.01;
  return cfg;
}

double CmracConfig::g_theta() const {
  return a_m + ell + std::abs(plant.k_p * theta_star());
}

double CmracConfig::g_n() const {
  return a_m + ell + 2.0 * std::abs(plant.k_p * theta_star());
}

double CmracConfig::g_rate() const {
  const double c = plant.k_p * theta_star();
  Eigen::Matrix2d q;
  q << a_m + ell, 0.5 * c, 0.5 * c, a_m + ell - c;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(q).eigenvalues().maxCoeff();
}

double CmracConfig::theta_max() const {
  if (!projection) {
    throw Error(ErrorKind::kPreconditionViolated, "theta_max needs a projection set");
  }
  return projection->theta_max();
}

void CmracConfig::validate() const {
  plant.validate();
  if (!(a_m < 0.0)) throw Error(ErrorKind::kInvalidConfig, "a_m must be < 0");
  if (!(ell <= 0.0)) throw Error(ErrorKind::kInvalidConfig, "ell must be <= 0");
  if (!(gamma > 0.0)) throw Error(ErrorKind::kInvalidConfig, "gamma must be > 0");
  if (!(eta > 0.0)) throw Error(ErrorKind::kInvalidConfig, "eta must be > 0");
  if (!std::isfinite(k_m)) throw Error(ErrorKind::kInvalidConfig, "k_m must be finite");
  for (double v : {x_a0, x_m0, x_o0, theta0, theta_hat0}) {
    if (!std::isfinite(v)) throw Error(ErrorKind::kInvalidConfig, "initial states must be finite");
  }
  regions.validate();
  noise.validate();
  integrator.validate();
  if (g_theta() >= 0.0) {
    throw Error(ErrorKind::kUnstableGain,
                "g_theta = a_m + ell + |k_p theta*| = " + format_double(g_theta()) +
                    " must be < 0");
  }
  if (projection) {
    projection->validate();
    const double b = projection->theta_bound;
    if (std::abs(theta_star()) > b) {
      throw Error(ErrorKind::kInvalidConfig,
                  "projection.theta_bound does not contain theta* = " +
                      format_double(theta_star()));
    }
    if (std::abs(theta0) > b + 1e-9 || std::abs(theta_hat0) > b + 1e-9) {
      throw Error(ErrorKind::kInvalidConfig,
                  "initial parameters lie outside the projection set");
    }
    if (a_m + ell + std::abs(plant.k_p) * b >= 0.0) {
      throw Error(ErrorKind::kUnstableGain,
                  "a_m + ell + |k_p| theta_bound must be < 0");
    }
  }
  check_fixed_step_rule(integrator, std::max({gamma, std::abs(ell), eta}));
}

double cmrac_lyapunov(double e_m, double e_o, double theta, double theta_hat,
                      const CmracConfig& cfg) {
  const double ts = cfg.theta_star();
  const double w = std::abs(cfg.plant.k_p) / cfg.gamma;
  const double dt = theta - ts;
  const double db = theta_hat - ts;
  return 0.5 * (e_m * e_m + e_o * e_o + w * (dt * dt + db * db));
}

CmracLoop::CmracLoop(CmracConfig cfg)
    : cfg_(std::move(cfg)), held_(std::make_shared<Held>()) {
  cfg_.validate();
}

CmracLoop::Signals CmracLoop::signals(const Vec& x, double n, double c) const {
  Signals s{};
  const bool co = cfg_.variant == CmracVariant::kCmracCo;
  s.x_p = x[kXa] + n;
  s.e_m = s.x_p - x[kXm];
  s.e_o = x[kXo] - s.x_p;
  s.eps = x[kTheta] - x[kThetaHat];
  s.r = cfg_.regions.filter_tau > 0.0 ? x[kFilter] : c;
  const double regressor = co ? x[kXo] : s.x_p;
  s.u = x[kTheta] * regressor + cfg_.k_star() * s.r;
  const double sk = sign_of(cfg_.plant.k_p);
  double raw_theta = -cfg_.gamma * sk * s.e_m * regressor;
  double raw_hat = cfg_.gamma * sk * s.e_o * regressor;
  if (cfg_.projection) {
    raw_theta = project_unchecked(scalar(raw_theta), scalar(x[kTheta]), *cfg_.projection)[0];
    raw_hat = project_unchecked(scalar(raw_hat), scalar(x[kThetaHat]), *cfg_.projection)[0];
  }
  s.theta_dot = raw_theta - cfg_.eta * s.eps;
  s.theta_hat_dot = raw_hat + cfg_.eta * s.eps;
  return s;
}

void CmracLoop::rhs(const Vec& x, double n, double c, Vec& dxdt) const {
  const Signals s = signals(x, n, c);
  const double kp = cfg_.plant.k_p;
  const bool co = cfg_.variant == CmracVariant::kCmracCo;
  dxdt.resize(kStateSize);
  dxdt[kXa] = cfg_.plant.a_p * x[kXa] + kp * s.u;
  dxdt[kXm] = cfg_.a_m * x[kXm] + cfg_.k_m * s.r - (co ? cfg_.ell * s.e_m : 0.0);
  dxdt[kXo] = cfg_.ell * (x[kXo] - s.x_p) + (cfg_.a_m - kp * x[kThetaHat]) * x[kXo] + kp * s.u;
  dxdt[kTheta] = s.theta_dot;
  dxdt[kThetaHat] = s.theta_hat_dot;
  dxdt[kFilter] = cfg_.regions.filter_tau > 0.0 ? (c - x[kFilter]) / cfg_.regions.filter_tau : 0.0;
  dxdt[kIntEm2] = s.e_m * s.e_m;
  dxdt[kIntEo2] = s.e_o * s.e_o;
  dxdt[kIntEps2] = s.eps * s.eps;
  dxdt[kIntThetaDot2] = s.theta_dot * s.theta_dot;
  dxdt[kIntThetaHatDot2] = s.theta_hat_dot * s.theta_hat_dot;
}

VectorField CmracLoop::vector_field() const {
  return [loop = *this](double, const Vec& x, Vec& dxdt) {
    loop.rhs(x, loop.held_->noise, loop.held_->command, dxdt);
  };
}

StepHook CmracLoop::step_hook() const {
  return [held = held_, cfg = cfg_](double t_begin, double) {
    held->noise = noise_signal(cfg.noise, t_begin);
    held->command = cfg.regions.command(t_begin);
  };
}

Vec CmracLoop::initial_state() const {
  Vec x0 = Vec::Zero(kStateSize);
  x0[kXa] = cfg_.x_a0;
  x0[kXm] = cfg_.x_m0;
  x0[kXo] = cfg_.x_o0;
  x0[kTheta] = cfg_.theta0;
  x0[kThetaHat] = cfg_.theta_hat0;
  return x0;
}

VectorField cmracco_loop(const CmracConfig& cfg) {
  return CmracLoop(cfg).vector_field();
}

const std::vector<std::string>& cmrac_channels(CmracVariant v) {
  static const auto make = [](const char* xm) {
    return std::vector<std::string>{
        "x_a",   "x_p_measured", xm,         "x_o",           "e_m",    "e_o",
        "eps_theta", "theta",    "theta_hat", "u",            "du_dt",  "V",
        "r",     "n",            "theta_dot", "theta_hat_dot", "int_e_m2",
        "int_e_o2", "int_eps2",  "int_theta_dot2", "int_theta_hat_dot2"};
  };
  static const std::vector<std::string> co = make("x_m");
  static const std::vector<std::string> classic = make("x_m_o");
  return v == CmracVariant::kCmracCo ? co : classic;
}

Trajectory simulate_cmrac(const CmracConfig& cfg) {
  const CmracLoop loop(cfg);
  const StateHistory hist = integrate_states(loop.vector_field(), loop.initial_state(),
                                             cfg.integrator, loop.step_hook());
  const std::size_t n = hist.times.size();
  std::vector<CmracLoop::Signals> sig(n);
  std::vector<double> noise(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = hist.times[k];
    noise[k] = noise_signal(cfg.noise, t);
    sig[k] = loop.signals(hist.states[k], noise[k], cfg.regions.command(t));
  }
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = sig[k].u;
  const std::vector<double> du = n >= 2 ? forward_difference(hist.times, u)
                                        : std::vector<double>(n, 0.0);

  std::ostringstream meta;
  meta << cfg.name << "; variant=" << to_string(cfg.variant) << "; "
       << cfg.integrator.describe();
  Trajectory traj(cmrac_channels(cfg.variant), meta.str());
  using L = CmracLoop;
  for (std::size_t k = 0; k < n; ++k) {
    const Vec& x = hist.states[k];
    const auto& s = sig[k];
    const std::vector<double> row = {
        x[L::kXa], s.x_p, x[L::kXm], x[L::kXo], s.e_m, s.e_o, s.eps, x[L::kTheta],
        x[L::kThetaHat], s.u, du[k],
        cmrac_lyapunov(s.e_m, s.e_o, x[L::kTheta], x[L::kThetaHat], cfg), s.r, noise[k],
        s.theta_dot, s.theta_hat_dot, x[L::kIntEm2], x[L::kIntEo2], x[L::kIntEps2],
        x[L::kIntThetaDot2], x[L::kIntThetaHatDot2]};
    traj.append(hist.times[k], row);
  }
  return traj;
}

VariantSummary summarize_variant(const Trajectory& traj, const CmracConfig& cfg) {
  VariantSummary out;
  out.variant = to_string(cfg.variant);
  const auto& t = traj.times();
  const auto& du = traj.channel("du_dt");
  const auto& e = traj.channel("e_m");
  const double ts = cfg.regions.t_switch;
  double du2 = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    const double h = t[k + 1] - t[k];
    if (t[k] + 1e-9 >= ts) {
      out.max_du_dt_region2 = std::max(out.max_du_dt_region2, std::abs(du[k]));
      du2 += du[k] * du[k] * h;
      out.max_e_region2 = std::max(out.max_e_region2, std::abs(e[k]));
      e2 += e[k] * e[k] * h;
    } else {
      out.max_e_region1 = std::max(out.max_e_region1, std::abs(e[k]));
      e1 += e[k] * e[k] * h;
    }
  }
  out.l2_du_dt_region2 = std::sqrt(du2);
  out.l2_e_region1 = std::sqrt(e1);
  out.l2_e_region2 = std::sqrt(e2);
  return out;
}

namespace {

bool same_setup(const CmracConfig& a, const CmracConfig& b) {
  const auto proj_eq = [](const std::optional<ProjectionSet>& p,
                          const std::optional<ProjectionSet>& q) {
    if (p.has_value() != q.has_value()) return false;
    return !p || (p->theta_bound == q->theta_bound && p->smoothing == q->smoothing);
  };
  const IntegratorConfig& i = a.integrator;
  const IntegratorConfig& j = b.integrator;
  return a.plant.a_p == b.plant.a_p && a.plant.k_p == b.plant.k_p && a.a_m == b.a_m &&
         a.k_m == b.k_m && a.ell == b.ell && a.gamma == b.gamma && a.eta == b.eta &&
         proj_eq(a.projection, b.projection) && a.regions.t_switch == b.regions.t_switch &&
         a.regions.amplitude == b.regions.amplitude &&
         a.regions.filter_tau == b.regions.filter_tau && a.noise.enabled == b.noise.enabled &&
         a.noise.seed == b.noise.seed && a.noise.rate == b.noise.rate &&
         a.noise.raw_variance == b.noise.raw_variance && a.noise.clamp == b.noise.clamp &&
         a.x_a0 == b.x_a0 && a.x_m0 == b.x_m0 && a.x_o0 == b.x_o0 && a.theta0 == b.theta0 &&
         a.theta_hat0 == b.theta_hat0 && i.method == j.method && i.dt == j.dt &&
         i.horizon == j.horizon && i.record_dt == j.record_dt &&
         i.hold_period == j.hold_period && i.abs_tol == j.abs_tol && i.rel_tol == j.rel_tol &&
         i.dt_max == j.dt_max;
}

}  // namespace

ComparisonReport compare_variants(const CmracConfig& cmrac, const CmracConfig& cmrac_co) {
  if (cmrac.variant != CmracVariant::kCmrac || cmrac_co.variant != CmracVariant::kCmracCo) {
    throw Error(ErrorKind::kMismatchedScenarios,
                "expected one CMRAC and one CMRAC-CO configuration");
  }
  if (!same_setup(cmrac, cmrac_co)) {
    throw Error(ErrorKind::kMismatchedScenarios,
                "variants must share plant, gains, noise, regions, initial state and integrator");
  }
  ComparisonReport rep;
  rep.cmrac = summarize_variant(simulate_cmrac(cmrac), cmrac);
  rep.cmrac_co = summarize_variant(simulate_cmrac(cmrac_co), cmrac_co);
  rep.cmrac_co_wins = rep.cmrac_co.max_du_dt_region2 < rep.cmrac.max_du_dt_region2;
  return rep;
}

double ell_gain_ratio(const CmracConfig& cfg) {
  const double g = cfg.g_theta();
  return cfg.ell * cfg.ell / (g * g);
}

double noise_xi_sup(const NoiseModel& model, double a_p, double horizon) {
  if (!model.enabled) return 0.0;
  const double h = 1.0 / model.rate;
  const long count = static_cast<long>(std::floor(horizon * model.rate + 1e-9)) + 1;
  std::vector<double> smooth(count);
  for (long k = 0; k < count; ++k) {
    double acc = 0.0;
    for (long j = k - 1; j <= k + 1; ++j) acc += model.sample(std::max(j, 0L));
    smooth[k] = acc / 3.0;
  }
  double sup = 0.0;
  for (long k = 0; k + 1 < count; ++k) {
    const double xi = (smooth[k + 1] - smooth[k]) / h - a_p * smooth[k];
    sup = std::max(sup, std::abs(xi));
  }
  return sup;
}

CmracCertification certify_cmracco_run(const Trajectory& traj, const CmracConfig& cfg,
                                       double t3) {
  if (cfg.variant != CmracVariant::kCmracCo) {
    throw Error(ErrorKind::kPreconditionViolated, "certificates apply to CMRAC-CO runs");
  }
  if (!cfg.projection) {
    throw Error(ErrorKind::kPreconditionViolated, "certificates need a projection set");
  }
  if (!(t3 >= traj.front_time() && t3 < traj.back_time())) {
    throw Error(ErrorKind::kPreconditionViolated, "t3 must lie inside the run");
  }
  CmracCertification out;
  const auto& t = traj.times();
  const auto& v = traj.channel("V");
  const double kp = std::abs(cfg.plant.k_p);
  const double tm = cfg.theta_max();
  const double em0 = traj.channel("e_m").front();
  const double eo0 = traj.channel("e_o").front();
  const double e02 = em0 * em0 + eo0 * eo0;
  const double param_offset = kp / cfg.gamma * tm * tm;

  out.measurements.push_back({"g_theta", cfg.g_theta(), ""});
  out.measurements.push_back({"g_n", cfg.g_n(), ""});
  out.measurements.push_back({"g_rate", cfg.g_rate(), "largest eigenvalue of the error quadratic form"});
  out.measurements.push_back({"ell2_over_gtheta2", ell_gain_ratio(cfg), ""});

  if (cfg.noisy()) {
    const double gn = cfg.g_n();
    if (gn >= 0.0) {
      throw Error(ErrorKind::kPreconditionViolated,
                  "noise bound needs g_n = a_m + ell + 2|k_p theta*| < 0");
    }
    const double xi = noise_xi_sup(cfg.noise, cfg.plant.a_p, traj.back_time());
    std::vector<double> env(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      env[k] = 0.5 * e02 * std::exp(-2.0 * std::abs(gn) * t[k]) + param_offset +
               xi * xi / (4.0 * gn * gn);
    }
    BoundCertificate c = envelope_certificate("V_noise_envelope", t, v, env);
    c.note = "approximate; " + c.note;
    out.certificates.push_back(c);
    out.measurements.push_back({"xi_sup", xi, "3-sample moving average of the held noise"});
    return out;
  }

  double worst_inc = -INFINITY;
  for (std::size_t k = 0; k + 1 < v.size(); ++k) worst_inc = std::max(worst_inc, v[k + 1] - v[k]);
  BoundCertificate inc = make_certificate("V_nonincreasing", worst_inc, 1e-8);
  inc.pass = worst_inc <= 1e-8;
  out.certificates.push_back(inc);

  const double g = std::abs(cfg.g_theta());
  std::vector<double> env(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    env[k] = 0.5 * e02 * std::exp(-2.0 * g * t[k]) + param_offset;
  }
  out.certificates.push_back(envelope_certificate("V_gronwall_envelope", t, v, env));

  const double T = traj.back_time();
  const double v_end = v.back();
  const double allowance = 10.0 * cfg.integrator.record_dt * cfg.integrator.record_dt;
  const auto tail = [&](const char* ch) {
    return sample_at(traj, ch, T) - sample_at(traj, ch, t3);
  };
  // Beyond T the integrals are bounded through V(T).
  const double rem_e = v_end / std::abs(cfg.g_rate());
  const double rem_eps = cfg.gamma * v_end / (cfg.eta * kp);
  const double e_bound = std::sqrt(e02) / (std::sqrt(2.0) * g) + std::sqrt(kp / (cfg.gamma * g)) * tm;
  const double eps_bound = std::sqrt(cfg.gamma * e02) / std::sqrt(2.0 * cfg.eta * kp * g) +
                           tm / std::sqrt(cfg.eta);
  out.certificates.push_back(make_certificate(
      "e_m_tail_L2", std::sqrt(std::max(0.0, tail("int_e_m2") + rem_e)), e_bound, allowance,
      "includes remainder estimate " + format_double(rem_e)));
  out.certificates.push_back(make_certificate(
      "e_o_tail_L2", std::sqrt(std::max(0.0, tail("int_e_o2") + rem_e)), e_bound, allowance,
      "includes remainder estimate " + format_double(rem_e)));
  out.certificates.push_back(make_certificate(
      "eps_theta_tail_L2", std::sqrt(std::max(0.0, tail("int_eps2") + rem_eps)), eps_bound,
      allowance, "includes remainder estimate " + format_double(rem_eps)));

  out.measurements.push_back({"theta_dot_tail_L2", tail("int_theta_dot2"), "trend only"});
  out.measurements.push_back({"theta_hat_dot_tail_L2", tail("int_theta_hat_dot2"), "trend only"});
  out.measurements.push_back({"t3", t3, ""});
  return out;
}

}  // namespace crmlab
