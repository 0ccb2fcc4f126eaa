#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace crmlab {

// Time series of named channels sharing one time grid. Built incrementally by
// the integrator and loop modules, then treated as read-only.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<std::string> channel_names,
                      std::string meta = {});

  // Appends one sample row; `values` follows channel_names() order.
  // Throws Divergence on a non-finite value and InvalidConfig when t does not
  // strictly increase.
  void append(double t, std::span<const double> values);

  // Adds a derived channel; length must match size().
  void add_channel(std::string name, std::vector<double> samples);

  std::size_t size() const { return times_.size(); }
  bool empty() const { return times_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::string>& channel_names() const { return names_; }
  bool has_channel(std::string_view name) const;
  // Throws UnknownChannel.
  const std::vector<double>& channel(std::string_view name) const;

  double front_time() const { return times_.front(); }
  double back_time() const { return times_.back(); }
  // Index of the first sample with time >= t (size() if none).
  std::size_t lower_index(double t) const;

  const std::string& meta() const { return meta_; }
  void set_meta(std::string meta) { meta_ = std::move(meta); }

  // CSV: header `t,<channels...>`, 17 significant digits.
  void write_csv(std::ostream& out) const;
  std::string to_csv() const;

 private:
  std::vector<std::string> names_;
  std::vector<double> times_;
  std::vector<std::vector<double>> data_;
  std::string meta_;
};

// "%.17g" formatting shared by CSV and JSON writers.
std::string format_double(double value);

}  // namespace crmlab
