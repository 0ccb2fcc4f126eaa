#include "crmlab/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "crmlab/error.hpp"
#include "crmlab/signal_ops.hpp"
#include "crmlab/spectral.hpp"

namespace crmlab {
namespace {

const std::vector<double>& require(const Trajectory& traj, const char* name) {
  if (!traj.has_channel(name)) {
    throw Error(ErrorKind::kMissingChannel,
                std::string("trajectory lacks channel '") + name + "'");
  }
  return traj.channel(name);
}

double quadrature_allowance(const ScalarScenario& s) {
  return 10.0 * s.integrator.record_dt * s.integrator.record_dt;
}

double sup_of(const std::vector<double>& v, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t k = from; k < v.size(); ++k) m = std::max(m, std::abs(v[k]));
  return m;
}

BoundCertificate monotone_v(const Trajectory& traj, const char* channel) {
  const auto& v = require(traj, channel);
  double worst = 0.0;
  double when = traj.front_time();
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] - v[k - 1] > worst) {
      worst = v[k] - v[k - 1];
      when = traj.times()[k];
    }
  }
  BoundCertificate c = make_certificate("V_nonincreasing", worst, 1e-8);
  c.pass = worst <= 1e-8;
  c.note = "largest increase at t=" + format_double(when);
  return c;
}

}  // namespace

double TransientConstants::c1(double t, double xm_at_t1, double xmo_sup) const {
  const double s = xmo_sup + std::abs(xm_at_t1) * std::exp(-std::abs(a_m) * (t - t1));
  return 2.0 * s * s;
}

double select_t1(const ScalarScenario& s, double delta, double epsilon) {
  if (!s.adapt.projection) {
    throw Error(ErrorKind::kPreconditionViolated, "t1 selection needs projection");
  }
  if (!(delta > 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "need delta > 1 and epsilon > 0");
  }
  const double gain = std::abs(s.plant.k_p) * s.adapt.projection->theta_max();
  const double a = s.ref.a_m + gain;
  // Both functions increase in t when a > 0; solve each for equality.
  if (a <= 0.0) {
    const double forced_sup = a < 0.0 ? gain / -a : std::numeric_limits<double>::infinity();
    if (forced_sup <= epsilon) return std::numeric_limits<double>::infinity();
    if (a == 0.0) return epsilon / gain;
    return std::log(1.0 - epsilon * -a / gain) / a;
  }
  const double t_delta = std::log(delta) / a;
  const double t_eps = std::log1p(epsilon * a / gain) / a;
  return std::min(t_delta, t_eps);
}

bool ell_star_condition(double a_m, double ell, double t1) {
  const double x = std::abs(a_m + ell);
  return std::exp(-x * t1) <= 1.0 / std::sqrt(x);
}

double ell_star(double a_m, double t1) {
  if (!(t1 > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "t1 must be > 0");
  }
  // g(x) = ½ ln x - x t1 is concave with its maximum at x = 1/(2 t1); the
  // condition fails exactly where g > 0, so past the upper root it holds.
  const auto g = [t1](double x) { return 0.5 * std::log(x) - x * t1; };
  const double peak = 1.0 / (2.0 * t1);
  double x_star = 0.0;
  if (g(peak) > 0.0) {
    double lo = peak;
    double hi = 2.0 * peak;
    while (g(hi) > 0.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) > 0.0 ? lo : hi) = mid;
    }
    x_star = hi;
  }
  // |a_m + ℓ| = |a_m| - ℓ for ℓ <= 0.
  return std::min(0.0, std::abs(a_m) - x_star);
}

TransientConstants transient_constants(const ScalarScenario& s, double xmo_sup,
                                       double t1, double delta, double epsilon) {
  TransientConstants c;
  const double am = std::abs(s.ref.a_m);
  const double e0 = s.initial_error();
  const double th0 = s.initial_parameter_error();
  c.a_m = s.ref.a_m;
  c.b1 = std::sqrt(e0 * e0 / (2.0 * am));
  c.b2 = std::sqrt(th0 * th0 / (2.0 * am));
  c.b3 = c.b2 + xmo_sup;
  c.b4 = std::abs(e0) / (2.0 * std::sqrt(am));
  c.theta_max = s.adapt.projection ? s.adapt.projection->theta_max() : 0.0;
  c.b5 = std::sqrt(std::abs(s.plant.k_p)) * c.theta_max / (2.0 * std::sqrt(am));
  c.t1 = t1;
  c.ell_star = ell_star(s.ref.a_m, t1);
  c.delta = delta;
  c.epsilon = epsilon;
  return c;
}

double delta_xm_sup(const Trajectory& traj) {
  const auto& xm = require(traj, "x_m");
  const auto& xmo = require(traj, "x_m_o");
  double m = 0.0;
  for (std::size_t k = 0; k < xm.size(); ++k) m = std::max(m, std::abs(xm[k] - xmo[k]));
  return m;
}

std::vector<BoundCertificate> certify_scalar_run(const Trajectory& traj,
                                                 const ScalarScenario& s) {
  const auto& t = traj.times();
  const auto& e = require(traj, "e");
  const auto& xmo = require(traj, "x_m_o");
  require(traj, "x_m");
  require(traj, "theta");
  require(traj, "k");
  const auto& v = require(traj, "V");
  const auto& int_e2 = require(traj, "int_e2");

  const double V0 = s.initial_lyapunov();
  const double rate = std::abs(s.ref.a_m + s.ref.ell);
  const double am = std::abs(s.ref.a_m);
  const double ell = std::abs(s.ref.ell);
  const double gamma = s.adapt.gamma;
  const double kp = std::abs(s.plant.k_p);
  const double allowance = quadrature_allowance(s);

  std::vector<BoundCertificate> out;
  out.push_back(make_certificate("e_L2", int_e2.back(), V0 / rate, allowance));

  double e2max = 0.0;
  for (double x : e) e2max = std::max(e2max, x * x);
  out.push_back(make_certificate("e_Linf", e2max, 2.0 * V0));

  out.push_back(make_certificate(
      "delta_xm_sup", delta_xm_sup(traj),
      ell * std::sqrt(1.0 / (2.0 * am)) * std::sqrt(V0 / rate)));

  if (s.ref.ell == 0.0) {
    const double th0 = s.initial_parameter_error();
    const double e0 = s.initial_error();
    out.push_back(make_certificate("e_Linf_gain_tradeoff", e2max,
                                   e0 * e0 + kp * th0 * th0 / gamma));
  }

  out.push_back(monotone_v(traj, "V"));

  if (!s.adapt.projection) {
    const double r_sup = s.input.sup_norm();
    const double xmo_sup = sup_of(xmo);
    out.push_back(make_certificate(
        "kdot_L2", require(traj, "int_k_dot2").back(),
        2.0 * gamma * gamma * r_sup * r_sup * V0 / rate, allowance));
    const double g2 = gamma * gamma;
    const double theta_bound = 4.0 * g2 * V0 * xmo_sup * xmo_sup / rate +
                               4.0 * g2 * V0 * V0 / rate +
                               2.0 * g2 * ell * ell * V0 * V0 / (am * rate * rate);
    out.push_back(make_certificate("thetadot_L2",
                                   require(traj, "int_theta_dot2").back(),
                                   theta_bound, allowance));
  } else {
    const double tm = s.adapt.projection->theta_max();
    const double e0 = s.initial_error();
    std::vector<double> v_env(t.size()), e2(t.size()), e_env(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double decay = std::exp(-2.0 * rate * t[k]);
      v_env[k] = 0.5 * e0 * e0 * decay + kp * tm * tm / (2.0 * gamma);
      e_env[k] = e0 * e0 * decay + kp * tm * tm / gamma;
      e2[k] = e[k] * e[k];
    }
    out.push_back(envelope_certificate("V_gronwall_envelope", t, v, v_env));
    out.push_back(envelope_certificate("e_exponential_envelope", t, e2, e_env));
  }
  return out;
}

TailReport truncated_certificates(const Trajectory& traj,
                                  const ScalarScenario& s, double t1) {
  if (!s.adapt.projection) {
    throw Error(ErrorKind::kPreconditionViolated, "tail bounds require projection");
  }
  const double gamma = s.adapt.gamma;
  const double ell = std::abs(s.ref.ell);
  if (std::abs(gamma - ell) > 1e-12 * std::max(1.0, ell)) {
    throw Error(ErrorKind::kPreconditionViolated,
                "tail bounds require gamma = |ell| (gamma=" + format_double(gamma) +
                    ", ell=" + format_double(s.ref.ell) + ")");
  }
  if (gamma < 1.0) {
    throw Error(ErrorKind::kPreconditionViolated, "tail bounds require gamma >= 1");
  }
  if (!(t1 > 0.0) || t1 >= traj.back_time()) {
    throw Error(ErrorKind::kPreconditionViolated, "t1 must lie inside the run");
  }
  if (!ell_star_condition(s.ref.a_m, s.ref.ell, t1)) {
    throw Error(ErrorKind::kPreconditionViolated,
                "ell=" + format_double(s.ref.ell) + " exceeds ell*=" +
                    format_double(ell_star(s.ref.a_m, t1)) + " for t1=" +
                    format_double(t1));
  }

  const auto& t = traj.times();
  const auto& e = require(traj, "e");
  const auto& xm = require(traj, "x_m");
  const auto& xmo = require(traj, "x_m_o");
  require(traj, "int_e2");
  require(traj, "int_k_dot2");
  require(traj, "int_theta_dot2");

  const double rate = std::abs(s.ref.a_m + s.ref.ell);
  const double am = std::abs(s.ref.a_m);
  const double kp = std::abs(s.plant.k_p);
  const double tm = s.adapt.projection->theta_max();
  const double e0 = s.initial_error();
  const double r_sup = s.input.sup_norm();
  const double T = traj.back_time();

  TailReport rep;
  const double remainder = e.back() * e.back() / (2.0 * rate);
  const double e_tail = sample_at(traj, "int_e2", T) - sample_at(traj, "int_e2", t1);
  rep.certificates.push_back(make_certificate(
      "e_tail_L2", std::sqrt(std::max(0.0, e_tail + remainder)),
      std::abs(e0) / (std::sqrt(2.0) * rate) + std::sqrt(kp / (2.0 * gamma * rate)) * tm,
      0.0, "includes remainder estimate " + format_double(remainder)));

  const TransientConstants c = transient_constants(s, sup_of(xmo), t1);
  const std::size_t i1 = traj.lower_index(t1 - 1e-12);
  const double xm_t1 = sample_at(traj, "x_m", t1);
  const double xmo_sup = sup_of(xmo);
  std::vector<double> xm2(t.size(), 0.0), env(t.size(), 0.0);
  for (std::size_t k = i1; k < t.size(); ++k) {
    xm2[k] = xm[k] * xm[k];
    env[k] = c.c1(t[k], xm_t1, xmo_sup) + e0 * e0 / am + ell * kp * tm * tm / (gamma * am);
  }
  rep.certificates.push_back(envelope_certificate("xm_tail_envelope", t, xm2, env, i1));

  const double kdot_tail =
      sample_at(traj, "int_k_dot2", T) - sample_at(traj, "int_k_dot2", t1);
  rep.certificates.push_back(make_certificate(
      "kdot_tail_L2", kdot_tail, (e0 * e0 + kp * tm * tm) * r_sup * r_sup,
      quadrature_allowance(s)));

  rep.measurements.push_back(
      {"thetadot_tail_L2",
       sample_at(traj, "int_theta_dot2", T) - sample_at(traj, "int_theta_dot2", t1),
       "trend only"});
  rep.measurements.push_back({"e_tail_remainder", remainder, "|e(T)|²/(2|a_m+ell|)"});
  rep.measurements.push_back({"t1", t1, ""});
  rep.measurements.push_back({"ell_star", c.ell_star, ""});
  return rep;
}

PeakingFit fit_peaking_exponent(std::vector<double> ell_abs,
                                std::vector<double> peaks) {
  if (ell_abs.size() != peaks.size() || ell_abs.size() < 3) {
    throw Error(ErrorKind::kDegenerateFit, "peaking fit needs >= 3 paired points");
  }
  const double n = static_cast<double>(ell_abs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ell_abs.size(); ++i) {
    if (!(ell_abs[i] > 0.0) || !(peaks[i] > 0.0)) {
      throw Error(ErrorKind::kDegenerateFit, "peaking fit needs positive |ell| and peaks");
    }
    const double x = std::log(ell_abs[i]);
    const double y = std::log(peaks[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double var = n * sxx - sx * sx;
  if (!(var > 1e-12 * std::max(1.0, n * sxx))) {
    throw Error(ErrorKind::kDegenerateFit, "|ell| values have zero variance");
  }
  PeakingFit fit;
  fit.exponent = (n * sxy - sx * sy) / var;
  fit.intercept = (sy - fit.exponent * sx) / n;
  fit.ell_values = std::move(ell_abs);
  fit.peaks = std::move(peaks);
  return fit;
}

PeakingFit peaking_exponent(const ScalarScenario& base,
                            const std::vector<double>& ells, bool couple_gamma) {
  std::vector<double> ell_abs, peaks;
  for (double ell : ells) {
    ScalarScenario s = base;
    s.ref.ell = ell;
    if (couple_gamma) s.adapt.gamma = std::abs(ell);
    ell_abs.push_back(std::abs(ell));
    peaks.push_back(delta_xm_sup(simulate_scalar(s)));
  }
  return fit_peaking_exponent(std::move(ell_abs), std::move(peaks));
}

OscillationMetrics oscillation_metrics(const Trajectory& traj,
                                       const std::string& channel,
                                       double t_start, double t_end) {
  if (!traj.has_channel(channel)) {
    throw Error(ErrorKind::kMissingChannel, "trajectory lacks channel '" + channel + "'");
  }
  const auto& times = traj.times();
  const std::size_t i0 = traj.lower_index(t_start - 1e-12);
  std::size_t i1 = traj.lower_index(t_end + 1e-12);
  i1 = std::min(i1, traj.size());
  if (i1 < i0 + 2) {
    throw Error(ErrorKind::kTooFewSamples, "window holds fewer than 2 samples");
  }
  const auto& full = traj.channel(channel);
  const std::vector<double> tw(times.begin() + static_cast<long>(i0),
                               times.begin() + static_cast<long>(i1));
  const std::vector<double> fw(full.begin() + static_cast<long>(i0),
                               full.begin() + static_cast<long>(i1));
  const std::vector<double> d = forward_difference(tw, fw);

  OscillationMetrics m;
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double band = 1e-6 * (*hi - *lo);
  int state = 0;
  for (double x : d) {
    const int s = x > band ? 1 : (x < -band ? -1 : 0);
    if (s == 0) continue;
    if (state != 0 && s != state) ++m.zero_crossings;
    state = s;
  }

  std::vector<double> sq(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) sq[k] = d[k] * d[k];
  m.l2_of_derivative = integrate_samples(tw, sq, tw.front(), tw.back());

  if (fw.size() >= 8) {
    const int N = static_cast<int>(std::min<std::size_t>(256, (fw.size() - 4) / 4));
    const std::vector<double> w = detrended_window(traj, channel, tw.front(), tw.back());
    const SpectralReport rep = parseval_identity(w, tw.back() - tw.front(), N);
    for (const auto& [f, a] : amplitude_spectrum(rep)) {
      if (f > 0.0 && a > m.peak_amplitude) {
        m.peak_amplitude = a;
        m.peak_frequency = f;
      }
    }
  }
  return m;
}

}  // namespace crmlab
