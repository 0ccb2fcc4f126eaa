#include "crmlab/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace crmlab {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string tick_label(double v, double step) {
  if (std::abs(v) < step * 1e-9) v = 0.0;
  const int decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step))));
  if (std::abs(v) >= 1e5 || (v != 0.0 && std::abs(v) < 1e-4)) return fmt(v, "%.1e");
  char spec[16];
  std::snprintf(spec, sizeof(spec), "%%.%df", std::min(decimals, 6));
  return fmt(v, spec);
}

}  // namespace

std::string render_svg(const std::vector<double>& times, const PlotPanel& panel,
                       int width, int height) {
  const double left = 70, right = 20, top = 34, bottom = 46;
  const double pw = width - left - right;
  const double ph = height - top - bottom;

  double t0 = times.empty() ? 0.0 : times.front();
  double t1 = times.empty() ? 1.0 : times.back();
  if (!(t1 > t0)) t1 = t0 + 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : panel.series) {
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!std::isfinite(lo)) {
    lo = -1.0;
    hi = 1.0;
  }
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    const double pad = std::max(1e-3, std::abs(hi) * 0.1);
    lo -= pad;
    hi += pad;
  } else {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  const auto xpix = [&](double t) { return left + (t - t0) / (t1 - t0) * pw; };
  const auto ypix = [&](double v) { return top + (hi - v) / (hi - lo) * ph; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
         std::to_string(width) + " " + std::to_string(height) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt(width / 2.0) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" +
         escape(panel.title) + "</text>\n";

  const double xs = nice_step(t1 - t0, 8);
  for (double t = std::ceil(t0 / xs) * xs; t <= t1 + 1e-9 * xs; t += xs) {
    const std::string x = fmt(xpix(t));
    out += "<line x1=\"" + x + "\" y1=\"" + fmt(top) + "\" x2=\"" + x + "\" y2=\"" +
           fmt(top + ph) + "\" stroke=\"#e5e5e5\"/>\n";
    out += "<text x=\"" + x + "\" y=\"" + fmt(top + ph + 15) +
           "\" text-anchor=\"middle\">" + tick_label(t, xs) + "</text>\n";
  }
  const double ys = nice_step(hi - lo, 6);
  for (double v = std::ceil(lo / ys) * ys; v <= hi + 1e-9 * ys; v += ys) {
    const std::string y = fmt(ypix(v));
    out += "<line x1=\"" + fmt(left) + "\" y1=\"" + y + "\" x2=\"" + fmt(left + pw) +
           "\" y2=\"" + y + "\" stroke=\"#e5e5e5\"/>\n";
    out += "<text x=\"" + fmt(left - 6) + "\" y=\"" + fmt(ypix(v) + 4) +
           "\" text-anchor=\"end\">" + tick_label(v, ys) + "</text>\n";
  }
  out += "<rect x=\"" + fmt(left) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(pw) +
         "\" height=\"" + fmt(ph) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  out += "<text x=\"" + fmt(left + pw / 2) + "\" y=\"" + fmt(height - 8.0) +
         "\" text-anchor=\"middle\">t [s]</text>\n";
  out += "<text transform=\"translate(16," + fmt(top + ph / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + escape(panel.y_label) + "</text>\n";

  const std::size_t buckets = static_cast<std::size_t>(pw);
  for (std::size_t si = 0; si < panel.series.size(); ++si) {
    const auto& s = panel.series[si];
    const std::size_t n = std::min(times.size(), s.values.size());
    std::string pts;
    const auto add = [&](std::size_t k) {
      if (!std::isfinite(s.values[k])) return;
      if (!pts.empty()) pts += ' ';
      pts += fmt(xpix(times[k])) + "," + fmt(ypix(s.values[k]));
    };
    if (n <= 2 * buckets) {
      for (std::size_t k = 0; k < n; ++k) add(k);
    } else {
      std::size_t start = 0;
      for (std::size_t b = 0; b < buckets && start < n; ++b) {
        const std::size_t end = std::max(start + 1, (b + 1) * n / buckets);
        std::size_t kmin = start, kmax = start;
        for (std::size_t k = start; k < end; ++k) {
          if (s.values[k] < s.values[kmin]) kmin = k;
          if (s.values[k] > s.values[kmax]) kmax = k;
        }
        add(std::min(kmin, kmax));
        if (kmin != kmax) add(std::max(kmin, kmax));
        start = end;
      }
    }
    const char* color = kPalette[si % std::size(kPalette)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"1.3\" points=\"" + pts + "\"/>\n";
    const double ly = top + 14 + 14.0 * static_cast<double>(si);
    out += "<line x1=\"" + fmt(left + pw - 110) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
           fmt(left + pw - 90) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt(left + pw - 84) + "\" y=\"" + fmt(ly) + "\">" +
           escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

PlotPanel channel_panel(const Trajectory& traj, std::string file_stem,
                        std::string title, std::string y_label,
                        const std::vector<std::string>& channels) {
  PlotPanel panel{std::move(file_stem), std::move(title), std::move(y_label), {}};
  for (const auto& c : channels) panel.series.push_back({c, traj.channel(c)});
  return panel;
}

}  // namespace crmlab
