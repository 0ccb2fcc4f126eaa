#include "crmlab/signal_ops.hpp"

#include <algorithm>
#include <cmath>

#include "crmlab/error.hpp"

namespace crmlab {

namespace {

bool is_uniform(std::span<const double> t, std::size_t first, std::size_t last) {
  if (last <= first + 1) return true;
  const double h = t[first + 1] - t[first];
  for (std::size_t i = first + 1; i < last; ++i) {
    if (std::abs((t[i + 1] - t[i]) - h) > 1e-9 * h) return false;
  }
  return true;
}

// Integral over samples [first, last] (inclusive indices).
double quadrature(std::span<const double> t, std::span<const double> f,
                  std::size_t first, std::size_t last) {
  if (last <= first) return 0.0;
  const std::size_t intervals = last - first;
  if (intervals < 2 || !is_uniform(t, first, last)) {
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) {
      sum += 0.5 * (t[i + 1] - t[i]) * (f[i] + f[i + 1]);
    }
    return sum;
  }
  const double h = (t[last] - t[first]) / static_cast<double>(intervals);
  std::size_t simpson_end = last;
  double tail = 0.0;
  if (intervals % 2 == 1) {
    // Simpson 3/8 over the last three intervals.
    simpson_end = last - 3;
    tail = 3.0 * h / 8.0 *
           (f[last - 3] + 3.0 * f[last - 2] + 3.0 * f[last - 1] + f[last]);
  }
  double sum = 0.0;
  if (simpson_end > first) {
    sum = f[first] + f[simpson_end];
    for (std::size_t i = first + 1; i < simpson_end; ++i) {
      sum += ((i - first) % 2 == 1 ? 4.0 : 2.0) * f[i];
    }
    sum *= h / 3.0;
  }
  return sum + tail;
}

}  // namespace

double integrate_samples(std::span<const double> times,
                         std::span<const double> values, double t_start,
                         double t_end) {
  if (times.size() != values.size()) {
    throw Error(ErrorKind::kInvalidConfig, "times/values length mismatch");
  }
  if (times.size() < 2) return 0.0;
  t_start = std::max(t_start, times.front());
  t_end = std::min(t_end, times.back());
  if (!(t_end > t_start)) return 0.0;

  const double tol = 1e-9 * std::max(1.0, std::abs(t_start));
  auto first = static_cast<std::size_t>(
      std::lower_bound(times.begin(), times.end(), t_start - tol) -
      times.begin());
  auto last = static_cast<std::size_t>(
      std::upper_bound(times.begin(), times.end(), t_end + tol) -
      times.begin());
  last = last == 0 ? 0 : last - 1;

  auto interp = [&](double t) {
    const auto hi = static_cast<std::size_t>(
        std::lower_bound(times.begin(), times.end(), t) - times.begin());
    if (hi == 0) return values[0];
    if (hi >= times.size()) return values.back();
    const double w = (t - times[hi - 1]) / (times[hi] - times[hi - 1]);
    return (1.0 - w) * values[hi - 1] + w * values[hi];
  };

  if (first > last) {
    // Both ends inside one recorded interval.
    return 0.5 * (t_end - t_start) * (interp(t_start) + interp(t_end));
  }
  double total = quadrature(times, values, first, last);
  if (times[first] - t_start > tol) {
    total += 0.5 * (times[first] - t_start) *
             (interp(t_start) + values[first]);
  }
  if (t_end - times[last] > tol) {
    total += 0.5 * (t_end - times[last]) * (values[last] + interp(t_end));
  }
  return total;
}

double truncated_l2(const Trajectory& traj, std::string_view channel,
                    double t_start, double t_end) {
  const auto& f = traj.channel(channel);
  if (traj.size() >= 1 &&
      (t_start < traj.front_time() - 1e-12 ||
       t_start > traj.back_time() + 1e-12)) {
    throw Error(ErrorKind::kInvalidConfig,
                "t_start outside the recorded horizon");
  }
  std::vector<double> sq(f.size());
  std::transform(f.begin(), f.end(), sq.begin(),
                 [](double v) { return v * v; });
  return integrate_samples(traj.times(), sq, t_start, t_end);
}

std::vector<double> forward_difference(std::span<const double> times,
                                       std::span<const double> values) {
  if (times.size() < 2 || values.size() != times.size()) {
    throw Error(ErrorKind::kTooFewSamples,
                "numeric derivative needs at least 2 samples");
  }
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    out[i] = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
  }
  out.back() = out[out.size() - 2];
  return out;
}

std::vector<double> numeric_derivative(const Trajectory& traj,
                                       std::string_view channel) {
  return forward_difference(traj.times(), traj.channel(channel));
}

double sup_abs(std::span<const double> values) {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

double sample_at(const Trajectory& traj, std::string_view channel, double t) {
  const auto& f = traj.channel(channel);
  const auto& ts = traj.times();
  if (ts.empty()) throw Error(ErrorKind::kTooFewSamples, "empty trajectory");
  if (t <= ts.front()) return f.front();
  if (t >= ts.back()) return f.back();
  const std::size_t hi = traj.lower_index(t);
  if (std::abs(ts[hi] - t) <= 1e-12 * std::max(1.0, t)) return f[hi];
  const double w = (t - ts[hi - 1]) / (ts[hi] - ts[hi - 1]);
  return (1.0 - w) * f[hi - 1] + w * f[hi];
}

}  // namespace crmlab
