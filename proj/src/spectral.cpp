#include "crmlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "crmlab/error.hpp"

namespace crmlab {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_sampling(std::size_t count, double tau, int N) {
  if (N < 0) throw Error(ErrorKind::kInvalidConfig, "harmonic count N must be >= 0");
  if (!(tau > 0.0)) throw Error(ErrorKind::kInvalidConfig, "period tau must be > 0");
  if (count < 4 * static_cast<std::size_t>(N) + 4) {
    throw Error(ErrorKind::kUndersampled,
                std::to_string(count) + " samples cannot resolve N=" +
                    std::to_string(N) + " harmonics (need " +
                    std::to_string(4 * N + 4) + ")");
  }
}

}  // namespace

std::vector<Complex> fourier_coefficients(std::span<const double> samples,
                                          double tau, int N) {
  check_sampling(samples.size(), tau, N);
  const std::size_t M = samples.size() - 1;
  const double dt = tau / static_cast<double>(M);
  std::vector<Complex> out(2 * N + 1);
  for (int n = 0; n <= N; ++n) {
    const double w = kTwoPi * n / tau;
    Complex acc = 0.0;
    for (std::size_t k = 0; k <= M; ++k) {
      const double weight = (k == 0 || k == M) ? 0.5 : 1.0;
      acc += weight * samples[k] * std::polar(1.0, -w * dt * static_cast<double>(k));
    }
    const Complex F = acc * dt / tau;
    out[N + n] = F;
    out[N - n] = std::conj(F);
  }
  return out;
}

std::vector<double> sample_derivative(std::span<const double> samples,
                                      double dt, bool periodic) {
  const std::size_t n = samples.size();
  if (n < 3) throw Error(ErrorKind::kTooFewSamples, "need at least 3 samples");
  std::vector<double> d(n);
  for (std::size_t k = 1; k + 1 < n; ++k) {
    d[k] = (samples[k + 1] - samples[k - 1]) / (2.0 * dt);
  }
  if (periodic) {
    // samples[n-1] repeats samples[0].
    d[0] = d[n - 1] = (samples[1] - samples[n - 2]) / (2.0 * dt);
  } else {
    d[0] = (-3.0 * samples[0] + 4.0 * samples[1] - samples[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * samples[n - 1] - 4.0 * samples[n - 2] + samples[n - 3]) / (2.0 * dt);
  }
  return d;
}

SpectralReport parseval_identity(std::span<const double> samples, double tau,
                                 int N) {
  SpectralReport rep;
  rep.tau = tau;
  rep.N = N;
  rep.coefficients = fourier_coefficients(samples, tau, N);
  rep.harmonic_energies.resize(rep.coefficients.size());
  for (int n = -N; n <= N; ++n) {
    const double w = kTwoPi * n / tau;
    rep.harmonic_energies[n + N] =
        std::norm(rep.coefficients[n + N]) * std::abs(w * kTwoPi * n);
    rep.identity_rhs += rep.harmonic_energies[n + N];
  }

  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  const double range = *hi - *lo;
  rep.endpoint_mismatch = std::abs(samples.back() - samples.front());
  rep.periodicity_warning = rep.endpoint_mismatch > 1e-6 * range;

  const std::size_t M = samples.size() - 1;
  const double dt = tau / static_cast<double>(M);
  const std::vector<double> d = sample_derivative(samples, dt, !rep.periodicity_warning);
  double lhs = 0.0;
  for (std::size_t k = 0; k <= M; ++k) {
    const double weight = (k == 0 || k == M) ? 0.5 : 1.0;
    lhs += weight * d[k] * d[k];
  }
  rep.identity_lhs = lhs * dt;
  const double scale = std::max(std::abs(rep.identity_lhs), std::abs(rep.identity_rhs));
  rep.relative_gap = scale > 0.0 ? std::abs(rep.identity_lhs - rep.identity_rhs) / scale : 0.0;
  return rep;
}

double truncation_error(std::span<const double> samples, double tau, int N) {
  const std::vector<Complex> F = fourier_coefficients(samples, tau, N);
  const std::size_t M = samples.size() - 1;
  const double dt = tau / static_cast<double>(M);
  double worst = 0.0;
  for (std::size_t k = 0; k <= M; ++k) {
    const double t = dt * static_cast<double>(k);
    double value = F[N].real();
    for (int n = 1; n <= N; ++n) {
      value += 2.0 * (F[N + n] * std::polar(1.0, kTwoPi * n * t / tau)).real();
    }
    worst = std::max(worst, std::abs(samples[k] - value));
  }
  return worst;
}

namespace {

std::pair<std::size_t, std::size_t> window_indices(const Trajectory& traj,
                                                   double t_start, double t_end) {
  const std::size_t i0 = traj.lower_index(t_start - 1e-9);
  std::size_t i1 = traj.lower_index(t_end - 1e-9);
  if (i1 >= traj.size()) i1 = traj.size() - 1;
  if (i0 >= traj.size() || i1 <= i0 + 2) {
    throw Error(ErrorKind::kTooFewSamples, "analysis window holds too few samples");
  }
  return {i0, i1};
}

}  // namespace

std::vector<double> detrended_window(const Trajectory& traj,
                                     const std::string& channel,
                                     double t_start, double t_end) {
  const auto& f = traj.channel(channel);
  const auto& t = traj.times();
  const auto [i0, i1] = window_indices(traj, t_start, t_end);
  std::vector<double> w(f.begin() + static_cast<long>(i0),
                        f.begin() + static_cast<long>(i1) + 1);
  const double span = t[i1] - t[i0];
  const double a = w.front();
  const double b = w.back();
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] -= a + (b - a) * (t[i0 + k] - t[i0]) / span;
  }
  w.front() = w.back() = 0.0;
  return w;
}

double trend_energy(const Trajectory& traj, const std::string& channel,
                    double t_start, double t_end) {
  const auto& f = traj.channel(channel);
  const auto& t = traj.times();
  const auto [i0, i1] = window_indices(traj, t_start, t_end);
  const double rise = f[i1] - f[i0];
  return rise * rise / (t[i1] - t[i0]);
}

std::vector<std::pair<double, double>> amplitude_spectrum(
    const SpectralReport& report) {
  std::vector<std::pair<double, double>> rows;
  rows.reserve(report.N + 1);
  for (int n = 0; n <= report.N; ++n) {
    const double mag = std::abs(report.coefficient(n));
    rows.emplace_back(n / report.tau, n == 0 ? mag : 2.0 * mag);
  }
  return rows;
}

}  // namespace crmlab
