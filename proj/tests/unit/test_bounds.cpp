#include <cmath>
#include <numbers>

#include "crmlab/bounds.hpp"
#include "crmlab/error.hpp"
#include "crmlab/signal_ops.hpp"
#include "crmlab/spectral.hpp"
#include "doctest.h"

using namespace crmlab;

namespace {

ScalarScenario base_case(double gamma, double ell) {
  ScalarScenario s;
  s.adapt.gamma = gamma;
  s.ref.ell = ell;
  return s;
}

ScalarScenario projected_case(double gamma) {
  ScalarScenario s = base_case(gamma, -gamma);
  s.adapt.projection = ProjectionSet{5.0, 0.1};
  return s;
}

const BoundCertificate& find(const std::vector<BoundCertificate>& certs,
                             const std::string& name) {
  for (const auto& c : certs) {
    if (c.name == name) return c;
  }
  FAIL("missing certificate " << name);
  return certs.front();
}

ScalarScenario peaking_base() {
  ScalarScenario s;
  s.adapt.gamma = 100.0;
  s.x_p0 = 0.0;
  s.input.kind = ReferenceInput::Kind::kSine;
  s.input.frequency = 0.5;
  return s;
}

}  // namespace

TEST_CASE("certificate tolerance rule") {
  CHECK(make_certificate("a", 1.0, 1.0).pass);
  CHECK(make_certificate("a", 1.0 + 5e-7, 1.0).pass);
  CHECK_FALSE(make_certificate("a", 1.0 + 2e-6, 1.0).pass);
  CHECK(make_certificate("a", 1e-3, 0.0, 1e-3).pass);
  CHECK_FALSE(make_certificate("a", NAN, 1.0).pass);
  const auto c = make_certificate("a", 0.25, 1.0);
  CHECK(c.margin == 0.75);
}

TEST_CASE("equilibrium run passes every certificate with zero measurements") {
  for (bool projected : {false, true}) {
    ScalarScenario s = base_case(100, -10);
    s.adapt.theta0 = -1.0;
    s.adapt.k0 = 0.5;
    s.x_p0 = s.x_m0 = 0.0;
    if (projected) {
      s.adapt.gamma = 10.0;
      s.adapt.projection = ProjectionSet{};
    }
    const Trajectory traj = simulate_scalar(s);
    for (const auto& c : certify_scalar_run(traj, s)) {
      INFO(c.name);
      CHECK(c.pass);
      CHECK(c.bound >= 0.0);
      if (c.name != "V_gronwall_envelope" && c.name != "e_exponential_envelope") {
        CHECK(std::abs(c.measured) < 1e-12);
      }
    }
    if (projected) {
      const auto tail = truncated_certificates(traj, s, 0.2);
      for (const auto& c : tail.certificates) {
        CHECK(c.pass);
      }
      CHECK(tail.measurements.front().value < 1e-20);
    }
  }
}

TEST_CASE("e-L2 bound matches hand evaluation and holds") {
  const ScalarScenario a = base_case(100, -10);
  const auto ca = certify_scalar_run(simulate_scalar(a), a);
  CHECK(find(ca, "e_L2").bound == doctest::Approx(0.5125 / 11.0).epsilon(1e-14));
  CHECK(find(ca, "e_L2").bound == doctest::Approx(4.659e-2).epsilon(1e-3));
  CHECK(find(ca, "e_L2").pass);

  const ScalarScenario b = base_case(100, -100);
  const auto cb = certify_scalar_run(simulate_scalar(b), b);
  CHECK(find(cb, "e_L2").bound == doctest::Approx(5.074e-3).epsilon(1e-3));
  CHECK(find(cb, "e_L2").pass);
}

TEST_CASE("running integral agrees with grid quadrature of e squared") {
  const ScalarScenario s = base_case(10, -10);
  const Trajectory traj = simulate_scalar(s);
  const double grid = truncated_l2(traj, "e", 0.0);
  CHECK(std::abs(grid - traj.channel("int_e2").back()) < 1e-6);
}

TEST_CASE("all certificates pass over the gamma-ell grid") {
  for (double gamma : {1.0, 10.0, 100.0}) {
    for (double ell : {0.0, -10.0, -100.0}) {
      const ScalarScenario s = base_case(gamma, ell);
      for (const auto& c : certify_scalar_run(simulate_scalar(s), s)) {
        INFO("gamma=" << gamma << " ell=" << ell << " " << c.name << " "
                      << c.measured << " <= " << c.bound);
        CHECK(c.pass);
      }
    }
  }
}

TEST_CASE("projected runs satisfy the exponential envelopes and tail bounds") {
  for (double gamma : {1.0, 10.0, 100.0, 1000.0}) {
    const ScalarScenario s = projected_case(gamma);
    const Trajectory traj = simulate_scalar(s);
    const auto certs = certify_scalar_run(traj, s);
    CHECK(find(certs, "V_gronwall_envelope").pass);
    CHECK(find(certs, "e_exponential_envelope").pass);
    for (const auto& c : truncated_certificates(traj, s, 0.2).certificates) {
      INFO(gamma << " " << c.name);
      CHECK(c.pass);
    }
  }
}

TEST_CASE("kdot tail bound uses the scenario constants") {
  const ScalarScenario s = projected_case(100);
  const auto tail = truncated_certificates(simulate_scalar(s), s, 0.2);
  CHECK(find(tail.certificates, "kdot_tail_L2").bound == doctest::Approx(201.0));
}

TEST_CASE("thetadot tail is non-increasing in gamma = |ell|") {
  double prev = INFINITY;
  double kdot_worst = 0.0;
  for (double gamma : {1.0, 10.0, 100.0, 1000.0}) {
    const ScalarScenario s = projected_case(gamma);
    const auto tail = truncated_certificates(simulate_scalar(s), s, 0.2);
    const double v = tail.measurements.front().value;
    CHECK(v <= prev);
    prev = v;
    kdot_worst = std::max(kdot_worst, find(tail.certificates, "kdot_tail_L2").measured);
  }
  CHECK(kdot_worst < 201.0);
}

TEST_CASE("tail preconditions") {
  ScalarScenario s = projected_case(100);
  const Trajectory traj = simulate_scalar(s);
  s.adapt.gamma = 50;
  CHECK_THROWS_AS(truncated_certificates(traj, s, 0.2), Error);
  s = base_case(100, -100);
  CHECK_THROWS_AS(truncated_certificates(traj, s, 0.2), Error);
  s = projected_case(100);
  try {
    truncated_certificates(traj, s, 0.01);
    FAIL("expected PreconditionViolated");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kPreconditionViolated);
  }
}

TEST_CASE("ell star condition and threshold") {
  CHECK(std::exp(-101 * 0.05) == doctest::Approx(6.4e-3).epsilon(1e-2));
  CHECK(ell_star_condition(-1.0, -100.0, 0.05));
  CHECK_FALSE(ell_star_condition(-1.0, -10.0, 0.01));
  CHECK(ell_star(-1.0, 0.2) == 0.0);
  const double star = ell_star(-1.0, 0.05);
  CHECK(star < 0.0);
  CHECK(ell_star_condition(-1.0, star - 1e-6, 0.05));
  CHECK(ell_star_condition(-1.0, star * 10.0, 0.05));
  CHECK_FALSE(ell_star_condition(-1.0, star + 1.0, 0.05));
}

TEST_CASE("t1 selection from delta and epsilon") {
  const ScalarScenario s = projected_case(100);
  const double t1 = select_t1(s, 1.1, 0.1);
  const double a = -1.0 + 2.0 * 10.0;
  CHECK(std::exp(a * t1) <= 1.1 + 1e-12);
  CHECK(20.0 * (std::exp(a * t1) - 1.0) / a <= 0.1 + 1e-12);
  CHECK(t1 > 0.004);
  CHECK_THROWS_AS(select_t1(base_case(100, -100), 1.1, 0.1), Error);
}

TEST_CASE("transient constants") {
  ScalarScenario s = projected_case(100);
  const auto c = transient_constants(s, 1.0, 0.2);
  CHECK(c.b1 == doctest::Approx(std::sqrt(0.5)));
  CHECK(c.b2 == doctest::Approx(std::sqrt(1.25 / 2.0)));
  CHECK(c.b3 == doctest::Approx(c.b2 + 1.0));
  CHECK(c.b4 == doctest::Approx(0.5));
  CHECK(c.b5 == doctest::Approx(std::sqrt(2.0) * 10.0 / 2.0));
  CHECK(c.c1(0.2, 0.5, 1.0) == doctest::Approx(2.0 * 1.5 * 1.5));
}

TEST_CASE("peaking exponent fit") {
  std::vector<double> ells = {10, 100, 1000};
  std::vector<double> peaks;
  for (double l : ells) peaks.push_back(3.0 * std::pow(l, 0.5));
  CHECK(std::abs(fit_peaking_exponent(ells, peaks).exponent - 0.5) < 1e-12);
  CHECK(std::abs(fit_peaking_exponent(ells, {2, 2, 2}).exponent) < 1e-12);
  CHECK_THROWS_AS(fit_peaking_exponent({10, 10, 10}, {1, 2, 3}), Error);
  CHECK_THROWS_AS(fit_peaking_exponent({10, 100}, {1, 2}), Error);
}

TEST_CASE("peaking dichotomy between fixed and coupled gamma") {
  const ScalarScenario base = peaking_base();
  const auto fixed = peaking_exponent(base, {-10, -100, -1000}, false);
  const auto coupled = peaking_exponent(base, {-10, -100, -1000}, true);
  CHECK(fixed.exponent >= 0.3);
  CHECK(fixed.exponent <= 0.6);
  CHECK(coupled.exponent < 0.15);
}

TEST_CASE("oscillation metrics on analytic channels") {
  Trajectory flat({"f"});
  Trajectory wave({"f"});
  for (int k = 0; k <= 2000; ++k) {
    const double t = 0.001 * k;
    const double c = 1.0;
    const double v = std::sin(2 * std::numbers::pi * 5 * t);
    flat.append(t, std::span<const double>(&c, 1));
    wave.append(t, std::span<const double>(&v, 1));
  }
  const auto m0 = oscillation_metrics(flat, "f");
  CHECK(m0.zero_crossings == 0);
  CHECK(m0.l2_of_derivative == 0.0);

  const auto m = oscillation_metrics(wave, "f");
  CHECK(m.zero_crossings >= 19);
  CHECK(m.zero_crossings <= 20);
  CHECK(m.peak_frequency == doctest::Approx(5.0));
  CHECK(m.peak_amplitude == doctest::Approx(1.0).epsilon(0.05));
  CHECK_THROWS_AS(oscillation_metrics(wave, "g"), Error);
}

TEST_CASE("CRM removes parameter oscillations seen with the ORM") {
  const ScalarScenario orm = base_case(100, 0);
  const ScalarScenario crm = base_case(100, -100);
  const auto mo = oscillation_metrics(simulate_scalar(orm), "theta");
  const auto mc = oscillation_metrics(simulate_scalar(crm), "theta");
  CHECK(mo.zero_crossings > mc.zero_crossings);
  CHECK(mo.l2_of_derivative > mc.l2_of_derivative);
}

TEST_CASE("derivative energy of theta matches its harmonic energies") {
  ScalarScenario s = base_case(100, 0);
  s.integrator.record_dt = 0.001;
  const Trajectory traj = simulate_scalar(s);
  for (auto [a, b] : {std::pair{10.0, 15.0}, std::pair{0.0, 5.0}}) {
    const auto w = detrended_window(traj, "theta", a, b);
    const auto rep = parseval_identity(w, b - a, 256);
    CHECK(rep.relative_gap < 0.05);
    const double direct = truncated_l2(traj, "theta_dot", a, b);
    const double spectral = rep.identity_rhs + trend_energy(traj, "theta", a, b);
    INFO("window " << a << ".." << b << " direct " << direct << " spectral " << spectral);
    CHECK(std::abs(spectral - direct) <= 0.05 * direct);
  }
}
