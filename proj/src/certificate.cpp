#include "crmlab/certificate.hpp"

#include <cmath>
#include <limits>

#include "crmlab/error.hpp"
#include "crmlab/trajectory.hpp"

namespace crmlab {

BoundCertificate make_certificate(std::string name, double measured,
                                  double bound, double allowance,
                                  std::string note) {
  BoundCertificate c;
  c.name = std::move(name);
  c.measured = measured;
  c.bound = bound;
  c.margin = bound - measured;
  const double tol = 1e-6 * std::abs(bound) + 1e-9 + allowance;
  c.pass = std::isfinite(measured) && std::isfinite(bound) && c.margin >= -tol;
  c.note = std::move(note);
  return c;
}

BoundCertificate envelope_certificate(std::string name,
                                      const std::vector<double>& times,
                                      const std::vector<double>& measured,
                                      const std::vector<double>& bound,
                                      std::size_t first_index) {
  if (measured.size() != bound.size() || measured.size() != times.size()) {
    throw Error(ErrorKind::kInvalidConfig, "envelope arrays differ in length");
  }
  if (first_index >= measured.size()) {
    return make_certificate(std::move(name), 0.0, 0.0, 0.0, "empty range");
  }
  // Worst sample is the one closest to failing under the certificate's own
  // tolerance rule.
  std::size_t worst = first_index;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = first_index; k < measured.size(); ++k) {
    const double slack =
        bound[k] - measured[k] + 1e-6 * std::abs(bound[k]) + 1e-9;
    if (slack < worst_slack) {
      worst_slack = slack;
      worst = k;
    }
  }
  return make_certificate(std::move(name), measured[worst], bound[worst], 0.0,
                          "worst sample at t=" + format_double(times[worst]));
}

bool all_pass(const std::vector<BoundCertificate>& certs) {
  for (const auto& c : certs) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace crmlab
