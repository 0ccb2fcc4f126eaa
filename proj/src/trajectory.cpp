#include "crmlab/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "crmlab/error.hpp"

namespace crmlab {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

Trajectory::Trajectory(std::vector<std::string> channel_names,
                       std::string meta)
    : names_(std::move(channel_names)),
      data_(names_.size()),
      meta_(std::move(meta)) {}

void Trajectory::append(double t, std::span<const double> values) {
  if (values.size() != names_.size()) {
    throw Error(ErrorKind::kInvalidConfig,
                "row has " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(names_.size()));
  }
  if (!times_.empty() && !(t > times_.back())) {
    throw Error(ErrorKind::kInvalidConfig,
                "trajectory times must strictly increase");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorKind::kDivergence,
                  "non-finite sample in channel '" + names_[i] + "' at t=" +
                      format_double(t));
    }
  }
  times_.push_back(t);
  for (std::size_t i = 0; i < values.size(); ++i) data_[i].push_back(values[i]);
}

void Trajectory::add_channel(std::string name, std::vector<double> samples) {
  if (samples.size() != times_.size()) {
    throw Error(ErrorKind::kInvalidConfig,
                "channel '" + name + "' length mismatch");
  }
  for (double v : samples) {
    if (!std::isfinite(v)) {
      throw Error(ErrorKind::kDivergence,
                  "non-finite sample in derived channel '" + name + "'");
    }
  }
  names_.push_back(std::move(name));
  data_.push_back(std::move(samples));
}

bool Trajectory::has_channel(std::string_view name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

const std::vector<double>& Trajectory::channel(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) {
    throw Error(ErrorKind::kUnknownChannel, std::string(name));
  }
  return data_[static_cast<std::size_t>(it - names_.begin())];
}

std::size_t Trajectory::lower_index(double t) const {
  return static_cast<std::size_t>(
      std::lower_bound(times_.begin(), times_.end(), t) - times_.begin());
}

void Trajectory::write_csv(std::ostream& out) const {
  out << 't';
  for (const auto& name : names_) out << ',' << name;
  out << '\n';
  for (std::size_t k = 0; k < times_.size(); ++k) {
    out << format_double(times_[k]);
    for (const auto& column : data_) out << ',' << format_double(column[k]);
    out << '\n';
  }
}

std::string Trajectory::to_csv() const {
  std::ostringstream out;
  write_csv(out);
  return out.str();
}

}  // namespace crmlab
