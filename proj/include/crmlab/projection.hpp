#pragma once

#include "crmlab/integrator.hpp"

namespace crmlab {

// Closed ball of radius theta_bound centred at the origin, with a boundary
// layer of relative width `smoothing` where outward updates are scaled down.
struct ProjectionSet {
  double theta_bound = 5.0;
  double smoothing = 0.1;

  // Worst-case parameter error over the set (its diameter).
  double theta_max() const { return 2.0 * theta_bound; }
  void validate() const;
};

// Smooth projection: with f = (|θ|² - θb²(1-ε)) / (ε θb²) clipped to [0,1],
// an outward update (θ·y > 0) loses the fraction f of its radial component.
// Continuous in (update, theta); the identity in the interior.
// Throws OutsideSet when |theta| exceeds the bound by more than 1e-9.
Vec project(const Vec& update, const Vec& theta, const ProjectionSet& set);

// Same operator without the containment check. Runge-Kutta stage states may
// sit marginally outside the ball even when the accepted solution does not.
Vec project_unchecked(const Vec& update, const Vec& theta,
                      const ProjectionSet& set);

}  // namespace crmlab
