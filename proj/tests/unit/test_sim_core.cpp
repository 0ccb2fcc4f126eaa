#include <cmath>
#include <numbers>
#include <sstream>

#include "crmlab/error.hpp"
#include "crmlab/integrator.hpp"
#include "crmlab/signal_ops.hpp"
#include "doctest.h"

using namespace crmlab;

namespace {

IntegratorConfig rk4(double dt, double horizon, double record_dt) {
  IntegratorConfig cfg;
  cfg.method = Method::kRk4;
  cfg.dt = dt;
  cfg.horizon = horizon;
  cfg.record_dt = record_dt;
  return cfg;
}

Trajectory sampled(double horizon, double dt, double (*f)(double)) {
  Trajectory traj({"f"});
  const long n = std::lround(horizon / dt);
  for (long i = 0; i <= n; ++i) {
    const double t = i * dt;
    const double v = f(t);
    traj.append(t, std::span<const double>(&v, 1));
  }
  return traj;
}

}  // namespace

TEST_CASE("exponential decay reaches e^-1") {
  IntegratorConfig cfg;
  cfg.horizon = 1.0;
  const auto decay = [](double, const Vec& x, Vec& dx) { dx = -x; };
  const Trajectory traj = integrate(decay, Vec::Ones(1), cfg);
  CHECK(traj.back_time() == doctest::Approx(1.0));
  CHECK(std::abs(traj.channel("x0").back() - std::exp(-1.0)) < 1e-8);

  const Trajectory fixed = integrate(decay, Vec::Ones(1), rk4(1e-3, 1.0, 0.01));
  CHECK(std::abs(fixed.channel("x0").back() - std::exp(-1.0)) < 1e-8);
}

TEST_CASE("zero field keeps a constant channel") {
  IntegratorConfig cfg;
  cfg.horizon = 2.0;
  const Trajectory traj = integrate(
      [](double, const Vec& x, Vec& dx) { dx = Vec::Zero(x.size()); },
      Vec::Constant(1, 3.0), cfg);
  for (double v : traj.channel("x0")) CHECK(v == 3.0);
}

TEST_CASE("harmonic oscillator returns after one period") {
  const auto osc = [](double, const Vec& x, Vec& dx) {
    dx.resize(2);
    dx << x[1], -x[0];
  };
  Vec x0(2);
  x0 << 1.0, 0.0;
  for (Method m : {Method::kRk45, Method::kRk4}) {
    IntegratorConfig cfg = m == Method::kRk4
                               ? rk4(2.0 * std::numbers::pi / 20000.0,
                                     2.0 * std::numbers::pi,
                                     2.0 * std::numbers::pi / 200.0)
                               : IntegratorConfig{};
    cfg.method = m;
    cfg.horizon = 2.0 * std::numbers::pi;
    cfg.record_dt = 2.0 * std::numbers::pi / 200.0;
    const Trajectory traj = integrate(osc, x0, cfg);
    const auto& a = traj.channel("x0");
    const auto& b = traj.channel("x1");
    CHECK(std::abs(a.back() - 1.0) < 1e-6);
    CHECK(std::abs(b.back()) < 1e-6);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(std::abs(a[i] * a[i] + b[i] * b[i] - 1.0) < 1e-7);
    }
  }
}

TEST_CASE("rk4 error shrinks at fourth order") {
  const auto decay = [](double, const Vec& x, Vec& dx) { dx = -x; };
  double prev = 0.0;
  for (double dt : {1e-2, 5e-3, 2.5e-3}) {
    const Trajectory traj = integrate(decay, Vec::Ones(1), rk4(dt, 1.0, 0.01));
    const double err = std::abs(traj.channel("x0").back() - std::exp(-1.0));
    if (prev > 0.0) CHECK(prev / err >= 8.0);
    prev = err;
  }
}

TEST_CASE("integration is bit-for-bit deterministic") {
  const auto field = [](double t, const Vec& x, Vec& dx) {
    dx.resize(2);
    dx << x[1], -std::sin(x[0]) + 0.3 * std::cos(t);
  };
  Vec x0(2);
  x0 << 0.4, 0.0;
  IntegratorConfig cfg;
  cfg.horizon = 5.0;
  CHECK(integrate(field, x0, cfg).to_csv() == integrate(field, x0, cfg).to_csv());
  const auto f = rk4(1e-3, 5.0, 0.01);
  CHECK(integrate(field, x0, f).to_csv() == integrate(field, x0, f).to_csv());
}

TEST_CASE("non-finite state aborts with divergence") {
  IntegratorConfig cfg;
  cfg.horizon = 2.0;
  const auto blowup = [](double, const Vec& x, Vec& dx) { dx = x.array().square(); };
  try {
    integrate(blowup, Vec::Ones(1) * 10.0, rk4(1e-3, 2.0, 0.01));
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDivergence);
  }
}

TEST_CASE("fixed-step rule rejects coarse steps for fast gains") {
  CHECK_NOTHROW(check_fixed_step_rule(rk4(1e-4, 1.0, 0.01), 1000.0));
  CHECK_THROWS_AS(check_fixed_step_rule(rk4(1e-3, 1.0, 0.01), 1000.0), Error);
  IntegratorConfig adaptive;
  CHECK_NOTHROW(check_fixed_step_rule(adaptive, 1000.0));
}

TEST_CASE("config validation") {
  IntegratorConfig cfg = rk4(0.02, 1.0, 0.01);
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = IntegratorConfig{};
  cfg.abs_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("truncated L2 of analytic channels") {
  const Trajectory decay = sampled(20.0, 0.01, [](double t) { return std::exp(-t); });
  CHECK(std::abs(truncated_l2(decay, "f", 0.0) - 0.5) < 1e-6);

  const Trajectory zero = sampled(1.0, 0.01, [](double) { return 0.0; });
  CHECK(truncated_l2(zero, "f", 0.0) == 0.0);

  const Trajectory sine =
      sampled(1.0, 0.01, [](double t) { return std::sin(2.0 * std::numbers::pi * t); });
  CHECK(std::abs(truncated_l2(sine, "f", 0.0) - 0.5) < 1e-6);

  CHECK_THROWS_AS(truncated_l2(sine, "g", 0.0), Error);
}

TEST_CASE("truncated L2 is additive over adjacent intervals") {
  const Trajectory traj =
      sampled(3.0, 0.01, [](double t) { return std::cos(3.0 * t) * std::exp(-0.2 * t); });
  for (double split : {0.5, 1.005, 1.7, 2.333}) {
    const double whole = truncated_l2(traj, "f", 0.0);
    const double parts = truncated_l2(traj, "f", 0.0, split) + truncated_l2(traj, "f", split);
    CHECK(std::abs(whole - parts) < 1e-5);
  }
}

TEST_CASE("forward difference conventions") {
  const Trajectory lin = sampled(2.0, 0.01, [](double t) { return t; });
  for (double v : numeric_derivative(lin, "f")) CHECK(v == doctest::Approx(1.0));

  const Trajectory flat = sampled(2.0, 0.01, [](double) { return 4.0; });
  for (double v : numeric_derivative(flat, "f")) CHECK(v == 0.0);

  const Trajectory sq = sampled(2.0, 0.01, [](double t) { return t * t; });
  const auto d = numeric_derivative(sq, "f");
  CHECK(d.size() == sq.size());
  CHECK(d[sq.lower_index(1.0 - 1e-12)] == doctest::Approx(2.01).epsilon(1e-9));

  Trajectory one({"f"});
  const double v = 1.0;
  one.append(0.0, std::span<const double>(&v, 1));
  CHECK_THROWS_AS(numeric_derivative(one, "f"), Error);
}

TEST_CASE("trajectory rejects bad samples and writes csv") {
  Trajectory traj({"a", "b"});
  const double row[2] = {1.0, 2.0};
  traj.append(0.0, row);
  CHECK_THROWS_AS(traj.append(0.0, row), Error);
  const double bad[2] = {NAN, 0.0};
  CHECK_THROWS_AS(traj.append(1.0, bad), Error);
  CHECK(traj.to_csv() == "t,a,b\n0,1,2\n");
  CHECK_THROWS_AS(traj.channel("c"), Error);
}
