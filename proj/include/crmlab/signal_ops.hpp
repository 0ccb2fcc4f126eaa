#pragma once

#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "crmlab/trajectory.hpp"

namespace crmlab {

// Squared truncated L2 norm: integral of f(t)^2 over [t_start, t_end] on the
// recorded grid. Composite Simpson on uniform grids (3/8 rule for an odd
// interval count), trapezoid otherwise; a partial first interval is handled
// by linear interpolation. Throws UnknownChannel.
double truncated_l2(const Trajectory& traj, std::string_view channel,
                    double t_start,
                    double t_end = std::numeric_limits<double>::infinity());

// Same quadrature over raw samples (values already squared or not, as given).
double integrate_samples(std::span<const double> times,
                         std::span<const double> values, double t_start,
                         double t_end);

// Forward difference (f[i+1]-f[i])/(t[i+1]-t[i]); the last value is repeated
// so the output has the input's length. Throws TooFewSamples.
std::vector<double> numeric_derivative(const Trajectory& traj,
                                       std::string_view channel);
std::vector<double> forward_difference(std::span<const double> times,
                                       std::span<const double> values);

double sup_abs(std::span<const double> values);

// Value of a cumulative-integral channel at time t (linear interpolation).
double sample_at(const Trajectory& traj, std::string_view channel, double t);

}  // namespace crmlab
