#include "crmlab/projection.hpp"

#include <algorithm>
#include <cmath>

#include "crmlab/error.hpp"

namespace crmlab {

void ProjectionSet::validate() const {
  if (!(theta_bound > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "projection.theta_bound must be > 0");
  }
  if (!(smoothing > 0.0 && smoothing < 1.0)) {
    throw Error(ErrorKind::kInvalidConfig,
                "projection.smoothing must lie in (0, 1)");
  }
}

Vec project_unchecked(const Vec& update, const Vec& theta,
                      const ProjectionSet& set) {
  const double b2 = set.theta_bound * set.theta_bound;
  const double norm2 = theta.squaredNorm();
  const double f = std::clamp(
      (norm2 - b2 * (1.0 - set.smoothing)) / (set.smoothing * b2), 0.0, 1.0);
  const double outward = theta.dot(update);
  if (f <= 0.0 || outward <= 0.0 || norm2 == 0.0) return update;
  return update - (f * outward / norm2) * theta;
}

Vec project(const Vec& update, const Vec& theta, const ProjectionSet& set) {
  if (theta.norm() > set.theta_bound + 1e-9) {
    throw Error(ErrorKind::kOutsideSet,
                "parameter norm " + format_double(theta.norm()) +
                    " exceeds bound " + format_double(set.theta_bound));
  }
  return project_unchecked(update, theta, set);
}

}  // namespace crmlab
