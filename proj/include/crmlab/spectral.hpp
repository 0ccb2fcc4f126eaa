#pragma once

#include <complex>
#include <span>
#include <vector>

#include "crmlab/trajectory.hpp"

namespace crmlab {

using Complex = std::complex<double>;

// Coefficients F(-N..N) of one period. `samples` cover [t0, t0 + tau] on a
// uniform grid including both endpoints; time is measured from t0.
// Trapezoid rule. Throws Undersampled when fewer than 4N+4 samples.
std::vector<Complex> fourier_coefficients(std::span<const double> samples,
                                          double tau, int N);

struct SpectralReport {
  double tau = 0.0;
  int N = 0;
  std::vector<Complex> coefficients;      // index n + N
  std::vector<double> harmonic_energies;  // |F(n)|² |ω(n) 2πn|, index n + N
  double identity_lhs = 0.0;              // ∫ ḟ² over the period
  double identity_rhs = 0.0;              // Σ harmonic energies
  double relative_gap = 0.0;
  double endpoint_mismatch = 0.0;  // |f(end) - f(start)|
  bool periodicity_warning = false;

  Complex coefficient(int n) const { return coefficients[n + N]; }
};

SpectralReport parseval_identity(std::span<const double> samples, double tau,
                                 int N);

// max_k |f(t_k) - Σ_{|n|<=N} F(n) e^{iω(n)t_k}|.
double truncation_error(std::span<const double> samples, double tau, int N);

// Samples of `channel` on [t_start, t_end] minus the line through the
// window endpoints, so the periodic extension is continuous.
std::vector<double> detrended_window(const Trajectory& traj,
                                     const std::string& channel,
                                     double t_start, double t_end);

// (f(t_end) - f(t_start))² / (t_end - t_start): the derivative energy carried
// by the removed line. ∫ḟ² = ∫(detrended)'² + trend_energy.
double trend_energy(const Trajectory& traj, const std::string& channel,
                    double t_start, double t_end);

// Central differences. With `periodic` the last sample repeats the first and
// the ends wrap around; otherwise second-order one-sided ends.
std::vector<double> sample_derivative(std::span<const double> samples,
                                      double dt, bool periodic);

// Amplitude spectrum rows (frequency Hz, 2|F(n)|) for n = 0..N (n=0 gives
// |F(0)|).
std::vector<std::pair<double, double>> amplitude_spectrum(
    const SpectralReport& report);

}  // namespace crmlab
