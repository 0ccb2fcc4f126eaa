#pragma once

#include <string>
#include <vector>

namespace crmlab {

struct BoundCertificate {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // bound - measured
  bool pass = false;
  std::string note;  // e.g. "approximate", or the worst sample time
};

// Pass when margin >= -(1e-6 |bound| + 1e-9 + allowance).
BoundCertificate make_certificate(std::string name, double measured,
                                  double bound, double allowance = 0.0,
                                  std::string note = {});

// Pointwise envelope check: reports the sample with the smallest margin.
BoundCertificate envelope_certificate(std::string name,
                                      const std::vector<double>& times,
                                      const std::vector<double>& measured,
                                      const std::vector<double>& bound,
                                      std::size_t first_index = 0);

bool all_pass(const std::vector<BoundCertificate>& certs);

// A quantity reported alongside certificates without a bound.
struct Measurement {
  std::string name;
  double value = 0.0;
  std::string note;
};

}  // namespace crmlab
