#include <cmath>
#include <numbers>
#include <vector>

#include "crmlab/error.hpp"
#include "crmlab/spectral.hpp"
#include "doctest.h"

using namespace crmlab;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double tau, int M, double (*f)(double)) {
  std::vector<double> out(M + 1);
  for (int k = 0; k <= M; ++k) out[k] = f(tau * k / M);
  return out;
}

double one_harmonic(double t) { return std::sin(2 * kPi * t); }
double two_harmonics(double t) { return std::sin(2 * kPi * t) + 0.5 * std::sin(4 * kPi * t); }
double triangle(double t) { return t < 0.5 ? 4 * t - 1 : 3 - 4 * t; }

}  // namespace

TEST_CASE("single harmonic coefficients") {
  const auto s = grid(1.0, 1000, one_harmonic);
  const auto F = fourier_coefficients(s, 1.0, 8);
  CHECK(std::abs(F[8 + 1] - Complex(0, -0.5)) < 1e-8);
  CHECK(std::abs(F[8 - 1] - Complex(0, 0.5)) < 1e-8);
  for (int n = -8; n <= 8; ++n) {
    if (std::abs(n) != 1) CHECK(std::abs(F[8 + n]) < 1e-8);
  }
}

TEST_CASE("constant signal") {
  const std::vector<double> s(101, 2.5);
  const auto F = fourier_coefficients(s, 1.0, 4);
  CHECK(std::abs(F[4] - Complex(2.5, 0)) < 1e-12);
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(F[4 + n]) < 1e-12);
  const auto rep = parseval_identity(s, 1.0, 4);
  CHECK(rep.identity_lhs == 0.0);
  CHECK(rep.identity_rhs < 1e-20);
}

TEST_CASE("two harmonic coefficients are conjugate symmetric") {
  const auto s = grid(1.0, 1000, two_harmonics);
  const auto F = fourier_coefficients(s, 1.0, 6);
  CHECK(std::abs(std::abs(F[6 + 1]) - 0.5) < 1e-8);
  CHECK(std::abs(std::abs(F[6 - 1]) - 0.5) < 1e-8);
  CHECK(std::abs(std::abs(F[6 + 2]) - 0.25) < 1e-8);
  CHECK(std::abs(std::abs(F[6 - 2]) - 0.25) < 1e-8);
  for (int n = 1; n <= 6; ++n) CHECK(std::abs(F[6 - n] - std::conj(F[6 + n])) == 0.0);
}

TEST_CASE("parseval identity on band-limited signals") {
  auto rep = parseval_identity(grid(1.0, 1000, one_harmonic), 1.0, 16);
  CHECK(std::abs(rep.identity_rhs - 2 * kPi * kPi) / (2 * kPi * kPi) < 1e-4);
  CHECK(std::abs(rep.identity_lhs - 2 * kPi * kPi) / (2 * kPi * kPi) < 1e-4);
  CHECK(rep.relative_gap < 1e-4);
  CHECK_FALSE(rep.periodicity_warning);

  rep = parseval_identity(grid(1.0, 1000, two_harmonics), 1.0, 16);
  CHECK(std::abs(rep.identity_rhs - 4 * kPi * kPi) / (4 * kPi * kPi) < 1e-3);
  CHECK(std::abs(rep.identity_lhs - 4 * kPi * kPi) / (4 * kPi * kPi) < 1e-3);
  for (double e : rep.harmonic_energies) CHECK(e >= 0.0);
}

TEST_CASE("truncation residual") {
  const auto s = grid(1.0, 1000, one_harmonic);
  CHECK(truncation_error(s, 1.0, 1) < 1e-8);
  CHECK(std::abs(truncation_error(s, 1.0, 0) - 1.0) < 1e-12);

  const auto tri = grid(1.0, 2000, triangle);
  double prev = INFINITY;
  for (int N : {1, 3, 7, 15}) {
    const double r = truncation_error(tri, 1.0, N);
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("undersampled input is rejected") {
  const auto s = grid(1.0, 10, one_harmonic);
  try {
    fourier_coefficients(s, 1.0, 3);
    FAIL("expected Undersampled");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndersampled);
  }
}

TEST_CASE("detrended window is periodic and flags mismatch otherwise") {
  Trajectory traj({"f"});
  for (int k = 0; k <= 5000; ++k) {
    const double t = 0.002 * k;
    const double v = 0.3 * t + std::sin(2 * kPi * t);
    traj.append(t, std::span<const double>(&v, 1));
  }
  const auto w = detrended_window(traj, "f", 2.0, 7.0);
  CHECK(w.size() == 2501);
  CHECK(std::abs(w.front()) < 1e-12);
  CHECK(std::abs(w.back()) < 1e-12);
  const auto rep = parseval_identity(w, 5.0, 100);
  CHECK_FALSE(rep.periodicity_warning);
  CHECK(rep.relative_gap < 1e-3);

  const auto raw = grid(1.0, 1000, [](double t) { return t; });
  CHECK(parseval_identity(raw, 1.0, 10).periodicity_warning);
}
