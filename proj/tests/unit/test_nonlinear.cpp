#include <cmath>
#include <random>

#include "crmlab/error.hpp"
#include "crmlab/nonlinear.hpp"
#include "doctest.h"

using namespace crmlab;

namespace {

BacksteppingScenario scenario(const char* regressor, int n, double c = 2.0) {
  BacksteppingScenario s;
  s.system = strict_feedback_preset(regressor, n, 1.0);
  s.design.c = Vec::Constant(n, c);
  s.x0 = Vec::Zero(n);
  return s;
}

// dz/dt along the true closed loop by a five-point difference in (t, x, θ).
Vec z_rate_numeric(const BacksteppingScenario& s, double t, const Vec& x, const Vec& theta) {
  const int n = s.system.n;
  const VectorField f = backstepping_loop(s);
  Vec state(n + 2), d;
  state << x, theta, 0.0;
  f(t, state, d);
  const double h = 1e-4;
  const auto z_at = [&](double k) {
    const Vec xs = x + k * h * d.head(n);
    const Vec ts = theta + k * h * d.segment(n, 1);
    return backstepping_design(s.system, s.design, ts, xs, s.system.y_r.derivatives(t + k * h, n)).z;
  };
  return (z_at(-2.0) - 8.0 * z_at(-1.0) + 8.0 * z_at(1.0) - z_at(2.0)) / (12.0 * h);
}

}  // namespace

TEST_CASE("smooth signal derivatives") {
  SmoothSignal y;
  const Vec d = y.derivatives(0.7, 3);
  CHECK(d[0] == doctest::Approx(std::sin(0.7)));
  CHECK(d[1] == doctest::Approx(std::cos(0.7)));
  CHECK(d[2] == doctest::Approx(-std::sin(0.7)));
  CHECK(d[3] == doctest::Approx(-std::cos(0.7)));
  SmoothSignal c2{1.0, 2.0, std::numbers::pi / 2.0, 0.0};
  CHECK(c2.derivative(0.3, 0) == doctest::Approx(std::cos(0.6)));
  CHECK(c2.derivative(0.3, 1) == doctest::Approx(-2.0 * std::sin(0.6)));
}

TEST_CASE("recursion base case n = 1") {
  const auto s = scenario("x1_squared", 1, 3.0);
  Vec x(1), th(1), yr(2);
  x << 0.8;
  th << 0.4;
  yr << 0.3, -0.2;
  const auto ev = backstepping_design(s.system, s.design, th, x, yr);
  const double z1 = 0.8 - 0.3;
  const double a1 = -3.0 * z1 - 0.64 * 0.4;
  CHECK(ev.z[0] == doctest::Approx(z1));
  CHECK(ev.alpha[0] == doctest::Approx(a1));
  CHECK(ev.W(0, 0) == doctest::Approx(0.64));
  CHECK(ev.tau[0] == doctest::Approx(0.64 * z1));
  CHECK(ev.u == doctest::Approx(a1 - 0.2));
  CHECK(ev.A_z(0, 0) == -3.0);
}

TEST_CASE("n = 2 matches the hand-derived closed form") {
  auto s = scenario("x1_squared", 2);
  s.design.c << 1.5, 2.5;
  s.design.Gamma = Mat::Constant(1, 1, 0.7);
  const double c1 = 1.5, c2 = 2.5, g = 0.7;
  Vec x(2), th(1), yr(3);
  x << 0.6, -0.4;
  th << 0.3;
  yr << 0.2, 0.9, -0.1;
  const auto ev = backstepping_design(s.system, s.design, th, x, yr);
  const double x1 = x[0], x2 = x[1], t = th[0];
  const double z1 = x1 - yr[0];
  const double a1 = -c1 * z1 - x1 * x1 * t;
  const double da1 = -c1 - 2.0 * x1 * t;
  const double z2 = x2 - yr[1] - a1;
  const double w2 = -da1 * x1 * x1;
  const double tau2 = x1 * x1 * z1 + w2 * z2;
  const double a2 = -z1 - c2 * z2 - w2 * t + da1 * x2 + c1 * yr[1] + (-x1 * x1) * g * tau2;
  CHECK(ev.z[1] == doctest::Approx(z2).epsilon(1e-14));
  CHECK(ev.W(0, 1) == doctest::Approx(w2).epsilon(1e-14));
  CHECK(ev.tau[0] == doctest::Approx(tau2).epsilon(1e-14));
  CHECK(ev.alpha[1] == doctest::Approx(a2).epsilon(1e-14));
  CHECK(ev.u == doctest::Approx(a2 + yr[2]).epsilon(1e-14));
  Mat expected(2, 2);
  expected << -c1, 1.0, -1.0, -c2;
  CHECK((ev.A_z - expected).norm() == 0.0);
}

TEST_CASE("closed-loop error dynamics match the transformed plant") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {2, 3}) {
    for (const char* reg : {"x1_squared", "squares"}) {
      const auto s = scenario(reg, n);
      double worst = 0.0;
      for (int k = 0; k < 20; ++k) {
        Vec x(n), th(1);
        for (int i = 0; i < n; ++i) x[i] = u(rng);
        th << 1.0 + u(rng);
        const double t = 3.0 * (u(rng) + 1.0);
        const auto ev = backstepping_design(s.system, s.design, th, x, s.system.y_r.derivatives(t, n));
        const Vec model = ev.A_z * ev.z - ev.W.transpose() * (th - s.system.theta_star);
        worst = std::max(worst, (z_rate_numeric(s, t, x, th) - model).cwiseAbs().maxCoeff());
      }
      INFO("n=" << n << " " << reg);
      CHECK(worst < (n == 2 ? 1e-6 : 1e-4));
    }
  }
}

TEST_CASE("n = 3 tuning functions against a coarser difference") {
  const auto s = scenario("squares", 3);
  Vec x(3), th(1);
  x << 0.3, -0.5, 0.2;
  th << 0.8;
  const Vec yr = s.system.y_r.derivatives(0.4, 3);
  const auto ev = backstepping_design(s.system, s.design, th, x, yr);
  // w_3 = φ_3 − Σ ∂α_2/∂x_k φ_k, with ∂α_2/∂x_k from a step-1e-4 difference.
  const auto alpha2 = [&](const Vec& xx) {
    BacksteppingScenario s2 = scenario("squares", 2);
    return backstepping_design(s2.system, s2.design, th, xx.head(2), yr.head(3)).alpha[1];
  };
  double w3 = x[2] * x[2];
  for (int k = 0; k < 2; ++k) {
    Vec xp = x, xm = x;
    xp[k] += 1e-4;
    xm[k] -= 1e-4;
    w3 -= (alpha2(xp) - alpha2(xm)) / 2e-4 * x[k] * x[k];
  }
  CHECK(std::abs(ev.W(0, 2) - w3) < 1e-4);
  CHECK(std::abs(ev.tau[0] - ev.W.row(0).dot(ev.z)) < 1e-12);
  CHECK(ev.A_z(1, 2) != 1.0);  // σ_23 present
  const Mat sym = ev.A_z + ev.A_z.transpose();
  CHECK((sym - Mat(Vec::Constant(3, -4.0).asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("z stays at zero from the reference with true parameters") {
  for (int n : {1, 2, 3}) {
    auto s = scenario("x1_squared", n);
    s.integrator.horizon = 5.0;
    s.theta0 = s.system.theta_star;
    s.x0 = state_from_z(s.system, s.design, s.theta0, Vec::Zero(n), s.system.y_r.derivatives(0.0, n));
    const Trajectory traj = simulate_backstepping(s);
    for (int i = 1; i <= n; ++i) {
      for (double z : traj.channel("z_" + std::to_string(i))) CHECK(std::abs(z) < 1e-9);
    }
  }
}

TEST_CASE("n = 2 acceptance scenario") {
  const auto s = scenario("x1_squared", 2);
  CHECK(s.initial_lyapunov() == doctest::Approx(1.0));  // z(0) = (0, -1), θ̃(0) = -1
  const Trajectory traj = simulate_backstepping(s);
  CHECK(std::abs(traj.channel("z_1").back()) < 1e-2);
  for (const auto& c : certify_backstepping_run(traj, s)) {
    INFO(c.name << " " << c.measured << " vs " << c.bound);
    CHECK(c.pass);
  }
  CHECK(traj.channel("int_z2").back() <= 0.5 + 1e-6);
}

TEST_CASE("larger gains at fixed z(0) do not increase the z energy") {
  for (int n : {2, 3}) {
    auto a = scenario("x1_squared", n);
    a.integrator.horizon = 10.0;
    const Vec yr = a.system.y_r.derivatives(0.0, n);
    const Vec z0 = Vec::Constant(n, 0.5);
    a.x0 = state_from_z(a.system, a.design, a.theta0, z0, yr);
    auto b = a;
    b.design.c *= 2.0;
    b.x0 = state_from_z(b.system, b.design, b.theta0, z0, yr);
    const double ea = simulate_backstepping(a).channel("int_z2").back();
    const double eb = simulate_backstepping(b).channel("int_z2").back();
    CHECK(eb <= ea);
  }
}

TEST_CASE("backstepping errors") {
  auto s = scenario("x1_squared", 2);
  s.system = strict_feedback_preset("x1_squared", 2, 1.0, 0.0, 0.0);
  Vec yr = Vec::Zero(3);
  try {
    backstepping_design(s.system, s.design, Vec::Zero(1), Vec::Zero(2), yr);
    FAIL("expected SingularBeta");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSingularBeta);
  }
  auto big = scenario("x1_squared", 3);
  big.system.n = 4;
  try {
    big.validate();
    FAIL("expected UnsupportedOrder");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUnsupportedOrder);
  }
  CHECK_THROWS_AS(strict_feedback_preset("cubic", 2, 1.0), Error);
}

TEST_CASE("robot regressor and skew symmetry") {
  RobotModel m;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec q(2), qd(2), qdr(2), qddr(2);
    q << u(rng), u(rng);
    qd << u(rng), u(rng);
    qdr << u(rng), u(rng);
    qddr << u(rng), u(rng);
    const Vec direct = m.H(q) * qddr + m.C(q, qd) * qdr + m.g(q);
    worst = std::max(worst, (m.Y(q, qd, qdr, qddr) * m.parameters() - direct).cwiseAbs().maxCoeff());
    CHECK(Eigen::LLT<Mat>(m.H(q)).info() == Eigen::Success);
  }
  CHECK(worst < 1e-9);
  CHECK(skew_symmetry_residual(m, 100, 5) < 1e-8);
  m.m2 = 2.5;
  m.l1 = 0.7;
  CHECK(skew_symmetry_residual(m, 100, 6) < 1e-8);
}

TEST_CASE("robot starting on the trajectory with true parameters") {
  RobotScenario s;
  s.integrator.horizon = 5.0;
  s.a_hat0 = s.model.parameters();
  s.q0 = s.desired.q(0.0, 0);
  s.qd0 = s.desired.q(0.0, 1);
  const Trajectory traj = simulate_robot(s);
  for (const char* ch : {"q_tilde_1", "q_tilde_2", "s_1", "s_2"}) {
    for (double v : traj.channel(ch)) CHECK(std::abs(v) < 1e-9);
  }
}

TEST_CASE("robot tracking run") {
  const RobotScenario s;
  const Trajectory traj = simulate_robot(s);
  CHECK(std::hypot(traj.channel("q_tilde_1").back(), traj.channel("q_tilde_2").back()) < 1e-2);
  for (const auto& c : certify_robot_run(traj, s)) CHECK(c.pass);
  const auto& v = traj.channel("V");
  for (std::size_t k = 0; k + 1 < v.size(); ++k) CHECK(v[k + 1] <= v[k] + 1e-8);
}

TEST_CASE("robot validation") {
  RobotScenario s;
  s.controller.lambda = 0.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = RobotScenario{};
  s.controller.k_d(0, 1) = 3.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = RobotScenario{};
  s.model.m1 = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
}
