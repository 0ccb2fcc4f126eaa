#include "crmlab/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "crmlab/error.hpp"

namespace crmlab {

std::string to_string(Method method) {
  return method == Method::kRk4 ? "rk4" : "rk45";
}

Method parse_method(const std::string& name) {
  if (name == "rk4") return Method::kRk4;
  if (name == "rk45" || name == "dopri5") return Method::kRk45;
  throw Error(ErrorKind::kInvalidConfig,
              "integrator.method must be 'rk4' or 'rk45', got '" + name + "'");
}

namespace {

bool near_integer_ratio(double num, double den, long* ratio) {
  const double q = num / den;
  const long r = std::lround(q);
  if (r < 1 || std::abs(q - static_cast<double>(r)) > 1e-9 * q) return false;
  *ratio = r;
  return true;
}

void check_finite(const Vec& x, double t) {
  if (!x.allFinite()) {
    std::ostringstream msg;
    msg << "state became non-finite at t=" << format_double(t);
    throw Error(ErrorKind::kDivergence, msg.str());
  }
}

}  // namespace

void IntegratorConfig::validate() const {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorKind::kInvalidConfig, "integrator." + msg);
  };
  if (!(horizon > 0.0) || !std::isfinite(horizon)) fail("horizon must be > 0");
  if (!(record_dt > 0.0)) fail("record_dt must be > 0");
  if (record_dt > horizon) fail("record_dt must not exceed horizon");
  if (!(hold_period >= 0.0)) fail("hold_period must be >= 0");
  if (method == Method::kRk4) {
    if (!(dt > 0.0)) fail("dt must be > 0");
    if (record_dt < dt) fail("record_dt must be >= dt for fixed-step RK4");
    long ratio = 0;
    if (!near_integer_ratio(record_dt, dt, &ratio)) {
      fail("record_dt must be an integer multiple of dt for fixed-step RK4");
    }
    if (hold_period > 0.0 && !near_integer_ratio(hold_period, dt, &ratio)) {
      fail("hold_period must be an integer multiple of dt for fixed-step RK4");
    }
  } else {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) fail("tolerances must be > 0");
    if (!(dt_max > 0.0)) fail("dt_max must be > 0");
    if (!(dt > 0.0)) fail("dt (initial step) must be > 0");
  }
}

long IntegratorConfig::record_count() const {
  return std::max(1L, std::lround(horizon / record_dt));
}

std::string IntegratorConfig::describe() const {
  std::ostringstream out;
  out << "method=" << to_string(method);
  if (method == Method::kRk4) {
    out << " dt=" << format_double(dt);
  } else {
    out << " abs_tol=" << format_double(abs_tol)
        << " rel_tol=" << format_double(rel_tol)
        << " dt_max=" << format_double(dt_max);
  }
  out << " horizon=" << format_double(horizon)
      << " record_dt=" << format_double(record_dt);
  return out.str();
}

void check_fixed_step_rule(const IntegratorConfig& cfg, double fastest_gain) {
  if (cfg.method != Method::kRk4) return;
  const double limit = 0.1 / std::max(1.0, std::abs(fastest_gain));
  if (cfg.dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::kInvalidConfig,
                "integrator.dt=" + format_double(cfg.dt) +
                    " violates the fixed-step rule dt <= 0.1/max(1, gain) = " +
                    format_double(limit));
  }
}

namespace {

StateHistory integrate_rk4(const VectorField& rhs, const Vec& x0,
                           const IntegratorConfig& cfg, const StepHook& hook) {
  long per_record = 1;
  near_integer_ratio(cfg.record_dt, cfg.dt, &per_record);
  const long records = cfg.record_count();
  const double dt = cfg.record_dt / static_cast<double>(per_record);

  StateHistory out;
  out.times.reserve(static_cast<std::size_t>(records + 1));
  out.states.reserve(static_cast<std::size_t>(records + 1));
  out.times.push_back(0.0);
  out.states.push_back(x0);

  const Eigen::Index n = x0.size();
  Vec x = x0, k1(n), k2(n), k3(n), k4(n), tmp(n);
  long step = 0;
  for (long rec = 1; rec <= records; ++rec) {
    for (long j = 0; j < per_record; ++j, ++step) {
      const double t = static_cast<double>(step) * dt;
      const double t_next = static_cast<double>(step + 1) * dt;
      const double h = t_next - t;
      if (hook) hook(t, t_next);
      rhs(t, x, k1);
      tmp = x + 0.5 * h * k1;
      rhs(t + 0.5 * h, tmp, k2);
      tmp = x + 0.5 * h * k2;
      rhs(t + 0.5 * h, tmp, k3);
      tmp = x + h * k3;
      rhs(t_next, tmp, k4);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      check_finite(x, t_next);
    }
    out.times.push_back(static_cast<double>(rec) * cfg.record_dt);
    out.states.push_back(x);
  }
  return out;
}

// Dormand-Prince 5(4) tableau with the Hairer-Wanner dense output.
namespace dp {
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                 a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;
}  // namespace dp

StateHistory integrate_rk45(const VectorField& rhs, const Vec& x0,
                            const IntegratorConfig& cfg,
                            const StepHook& hook) {
  const long records = cfg.record_count();
  const double t_final = static_cast<double>(records) * cfg.record_dt;
  const Eigen::Index n = x0.size();

  StateHistory out;
  out.times.reserve(static_cast<std::size_t>(records + 1));
  out.states.reserve(static_cast<std::size_t>(records + 1));
  out.times.push_back(0.0);
  out.states.push_back(x0);

  Vec y = x0, y_new(n), tmp(n);
  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  Vec r2(n), r3(n), r4(n), r5(n);
  double t = 0.0;
  double h = std::min(cfg.dt, cfg.dt_max);
  long next_record = 1;
  bool have_k1 = false;
  constexpr double kSafety = 0.9, kMinFactor = 0.2, kMaxFactor = 10.0;

  while (next_record <= records) {
    double t_end_limit = t_final;
    if (cfg.hold_period > 0.0) {
      const double cell = std::floor(t / cfg.hold_period + 1e-9);
      t_end_limit = std::min(t_end_limit, (cell + 1.0) * cfg.hold_period);
    }
    h = std::min({h, cfg.dt_max, t_end_limit - t});
    const double h_min =
        16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t);
    if (h < h_min) {
      throw Error(ErrorKind::kStepUnderflow,
                  "step size " + format_double(h) + " at t=" +
                      format_double(t));
    }
    const bool lands_on_limit = (t + h >= t_end_limit);
    const double t_new = lands_on_limit ? t_end_limit : t + h;
    h = t_new - t;

    if (hook) {
      hook(t, t_new);
      have_k1 = false;
    }
    if (!have_k1) rhs(t, y, k1);

    using namespace dp;
    tmp = y + h * (a21 * k1);
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t_new, tmp, k6);
    y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t_new, y_new, k7);

    double err = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                            e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double scale =
          cfg.abs_tol +
          cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
      err += (e / scale) * (e / scale);
    }
    err = n > 0 ? std::sqrt(err / static_cast<double>(n)) : 0.0;

    if (!std::isfinite(err) || err > 1.0) {
      const double factor =
          std::isfinite(err)
              ? std::max(kMinFactor, kSafety * std::pow(err, -0.2))
              : kMinFactor;
      h *= factor;
      have_k1 = !static_cast<bool>(hook);
      continue;
    }
    check_finite(y_new, t_new);

    // Dense output onto every record time inside (t, t_new].
    r2 = y_new - y;
    r3 = h * k1 - r2;
    r4 = r2 - h * k7 - r3;
    r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
    while (next_record <= records) {
      const double tr = static_cast<double>(next_record) * cfg.record_dt;
      if (tr > t_new + 1e-12 * std::max(1.0, t_new)) break;
      Vec yr;
      if (next_record == records || std::abs(tr - t_new) <= 1e-14 * std::max(1.0, t_new)) {
        yr = y_new;
      } else {
        const double s = (tr - t) / h;
        const double s1 = 1.0 - s;
        yr = y + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
      }
      out.times.push_back(tr);
      out.states.push_back(std::move(yr));
      ++next_record;
    }

    t = t_new;
    y = y_new;
    k1 = k7;
    have_k1 = true;
    const double factor =
        err == 0.0 ? kMaxFactor
                   : std::min(kMaxFactor,
                              std::max(kMinFactor,
                                       kSafety * std::pow(err, -0.2)));
    h *= factor;
  }
  return out;
}

}  // namespace

StateHistory integrate_states(const VectorField& rhs, const Vec& x0,
                              const IntegratorConfig& cfg,
                              const StepHook& hook) {
  cfg.validate();
  if (!x0.allFinite()) {
    throw Error(ErrorKind::kInvalidConfig, "initial state must be finite");
  }
  return cfg.method == Method::kRk4 ? integrate_rk4(rhs, x0, cfg, hook)
                                    : integrate_rk45(rhs, x0, cfg, hook);
}

Trajectory integrate(const VectorField& rhs, const Vec& x0,
                     const IntegratorConfig& cfg,
                     std::vector<std::string> names, std::string meta) {
  if (names.empty()) {
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
      names.push_back("x" + std::to_string(i));
    }
  }
  if (static_cast<Eigen::Index>(names.size()) != x0.size()) {
    throw Error(ErrorKind::kInvalidConfig, "channel name count mismatch");
  }
  const StateHistory hist = integrate_states(rhs, x0, cfg);
  Trajectory traj(std::move(names), meta.empty() ? cfg.describe() : meta);
  for (std::size_t k = 0; k < hist.times.size(); ++k) {
    traj.append(hist.times[k],
                std::span<const double>(hist.states[k].data(),
                                        static_cast<std::size_t>(
                                            hist.states[k].size())));
  }
  return traj;
}

}  // namespace crmlab
