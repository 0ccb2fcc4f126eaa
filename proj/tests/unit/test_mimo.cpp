#include <cmath>

#include "crmlab/error.hpp"
#include "crmlab/mimo_crm.hpp"
#include "doctest.h"

using namespace crmlab;

namespace {

Mat mat2(double a, double b, double c, double d) {
  Mat M(2, 2);
  M << a, b, c, d;
  return M;
}

// Unprojected demo loop in plain arrays: x_p(2), x_m(2), Θ(2), K(1).
std::array<double, 7> demo_reference(double gamma, double dt, double horizon) {
  auto f = [gamma](const std::array<double, 7>& s) {
    const double e1 = s[0] - s[2], e2 = s[1] - s[3];
    const double u = s[4] * s[0] + s[5] * s[1] + s[6];
    const double g = -gamma;
    // L = -A_m + g I
    const double l11 = g, l12 = -1.0, l21 = 4.0, l22 = 4.0 + g;
    std::array<double, 7> d{};
    d[0] = s[1];
    d[1] = -s[0] - 2 * s[1] + u;
    d[2] = s[3] - (l11 * e1 + l12 * e2);
    d[3] = -4 * s[2] - 4 * s[3] + 1.0 - (l21 * e1 + l22 * e2);
    d[4] = -0.5 * gamma * e2 * s[0];
    d[5] = -0.5 * gamma * e2 * s[1];
    d[6] = -0.5 * gamma * e2;
    return d;
  };
  std::array<double, 7> s{0, 0, 0, 0, 0, 0, 1};
  const long n = std::lround(horizon / dt);
  for (long i = 0; i < n; ++i) {
    auto add = [&](const std::array<double, 7>& k, double h) {
      std::array<double, 7> o;
      for (int j = 0; j < 7; ++j) o[j] = s[j] + h * k[j];
      return o;
    };
    const auto k1 = f(s), k2 = f(add(k1, dt / 2)), k3 = f(add(k2, dt / 2)), k4 = f(add(k3, dt));
    for (int j = 0; j < 7; ++j) s[j] += dt / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
  }
  return s;
}

}  // namespace

TEST_CASE("matched gains for the demo plant") {
  const MimoScenario s = mimo_demo_scenario();
  const MimoMatch m = s.truth();
  CHECK(std::abs(m.Theta_star(0, 0) + 3.0) < 1e-12);
  CHECK(std::abs(m.Theta_star(0, 1) + 2.0) < 1e-12);
  CHECK(std::abs(m.K_star(0, 0) - 1.0) < 1e-12);
  CHECK((s.plant.A + s.plant.B * s.plant.Lambda * m.Theta_star - s.ref.A_m).norm() < 1e-9);
}

TEST_CASE("matched gains in trivial cases") {
  MimoPlant p;
  p.A = mat2(-1, 0.5, 0, -2);
  p.B = Mat::Identity(2, 2);
  p.Lambda = Mat::Identity(2, 2);
  auto m = mimo_matched_gains(p, p.A);
  CHECK(m.Theta_star.norm() < 1e-12);
  CHECK((m.K_star - Mat::Identity(2, 2)).norm() < 1e-12);

  p.Lambda = 2.0 * Mat::Identity(2, 2);
  p.lambda_bar = 2.0;
  m = mimo_matched_gains(p, p.A);
  CHECK(m.Theta_star.norm() < 1e-12);
  CHECK((m.K_star - 0.5 * Mat::Identity(2, 2)).norm() < 1e-12);

  MimoPlant q;
  q.A = mat2(0, 1, -1, -2);
  q.B = Mat(2, 1);
  q.B << 0, 1;
  q.Lambda = Mat::Identity(1, 1);
  try {
    mimo_matched_gains(q, mat2(-1, 0, 0, -1));
    FAIL("expected NoMatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kNoMatch);
  }
}

TEST_CASE("assumption algebra gives an exact Lyapunov solution") {
  const MimoScenario s = mimo_demo_scenario();
  CHECK(lyapunov_residual(s.ref) == 0.0);
  MimoReference bad = s.ref;
  bad.L_override = mat2(1, 0, 0, 1);
  try {
    bad.validate(2);
    FAIL("expected AssumptionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kAssumptionViolated);
  }
}

TEST_CASE("decay envelopes") {
  const DecayEnvelope unit{1.0, 1.0};
  CHECK(verify_decay_envelope(-Mat::Identity(2, 2), unit));
  CHECK_FALSE(verify_decay_envelope(-Mat::Identity(2, 2), DecayEnvelope{1.0, 1.5}));
  const Mat Am = mimo_demo_scenario().ref.A_m;
  const DecayEnvelope env = decay_envelope(Am);
  CHECK(env.a2 == doctest::Approx(1.8));
  CHECK(env.a1 >= 1.0);
  CHECK(verify_decay_envelope(Am, env));
  CHECK_THROWS_AS(decay_envelope(mat2(0, 1, 0, 0)), Error);
  // e^{A t} against the closed form for a diagonal matrix.
  const Mat E = matrix_exponential(mat2(-1, 0, 0, -3) * 0.7);
  CHECK(std::abs(E(0, 0) - std::exp(-0.7)) < 1e-14);
  CHECK(std::abs(E(1, 1) - std::exp(-2.1)) < 1e-14);
}

TEST_CASE("equilibrium keeps all errors at zero") {
  MimoScenario s = mimo_demo_scenario(10.0);
  s.adapt.Theta0 = s.truth().Theta_star;
  s.adapt.K0 = s.truth().K_star;
  const Trajectory traj = simulate_mimo(s);
  for (double v : traj.channel("e_norm")) CHECK(v < 1e-12);
  for (double v : traj.channel("Theta_11")) CHECK(std::abs(v + 3.0) < 1e-12);
  const auto cert = certify_mimo_run(traj, s, 0.2);
  for (const auto& c : cert.certificates) CHECK(c.pass);
}

TEST_CASE("demo converges and agrees with an independent integration") {
  MimoScenario s = mimo_demo_scenario(100.0);
  const Trajectory traj = simulate_mimo(s);
  CHECK(traj.channel("e_norm").back() < 1e-2);

  s.adapt.theta_projection.reset();
  s.adapt.k_projection.reset();
  const Trajectory free = simulate_mimo(s);
  const auto ref = demo_reference(100.0, 2e-5, 15.0);
  CHECK(std::abs(free.channel("x_p_1").back() - ref[0]) < 1e-6);
  CHECK(std::abs(free.channel("Theta_11").back() - ref[4]) < 1e-6);
  CHECK(std::abs(free.channel("Theta_12").back() - ref[5]) < 1e-6);
  CHECK(std::abs(free.channel("K_11").back() - ref[6]) < 1e-6);
}

TEST_CASE("demo certificates and Lyapunov decrease") {
  for (double g : {1.0, 10.0, 100.0}) {
    const MimoScenario s = mimo_demo_scenario(g);
    const Trajectory traj = simulate_mimo(s);
    for (const auto& c : certify_mimo_run(traj, s, 0.2).certificates) {
      INFO("g=" << g << " " << c.name << " " << c.measured << " vs " << c.bound);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("Theta-dot tail is non-increasing over gamma = |g|") {
  double prev = INFINITY;
  for (double g : {1.0, 10.0, 100.0}) {
    const MimoScenario s = mimo_demo_scenario(g);
    const auto cert = certify_mimo_run(simulate_mimo(s), s, 0.2);
    const double v = cert.measurements.front().value;
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("projection keeps matrices inside their balls") {
  MimoScenario s = mimo_demo_scenario(100.0);
  s.adapt.theta_projection = ProjectionSet{3.7, 0.1};
  s.adapt.k_projection = ProjectionSet{1.2, 0.1};
  s.x_p0 = Vec::Constant(2, 3.0);
  const Trajectory traj = simulate_mimo(s);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(std::hypot(traj.channel("Theta_11")[k], traj.channel("Theta_12")[k]) <= 3.7 + 1e-6);
    CHECK(std::abs(traj.channel("K_11")[k]) <= 1.2 + 1e-6);
  }
}

TEST_CASE("mimo preconditions") {
  MimoScenario s = mimo_demo_scenario(10.0);
  const Trajectory traj = simulate_mimo(s);
  s.adapt.gamma = 20.0;
  CHECK_THROWS_AS(certify_mimo_run(traj, s, 0.2), Error);
  s = mimo_demo_scenario(10.0);
  s.adapt.k_projection.reset();
  CHECK_THROWS_AS(certify_mimo_run(traj, s, 0.2), Error);
  s = mimo_demo_scenario(10.0);
  s.plant.Lambda = mat2(1, 0.2, 0, 1).topLeftCorner(1, 1) * -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s = mimo_demo_scenario(10.0);
  s.ref.A_m = mat2(1, 0, 0, -1);
  CHECK_THROWS_AS(s.validate(), Error);
}
