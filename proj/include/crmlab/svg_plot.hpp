#pragma once

#include <string>
#include <vector>

#include "crmlab/trajectory.hpp"

namespace crmlab {

struct PlotSeries {
  std::string label;
  std::vector<double> values;
};

struct PlotPanel {
  std::string file_stem;  // output file name without extension
  std::string title;
  std::string y_label;
  std::vector<PlotSeries> series;
};

// Time-series line plot. Long series are reduced to per-pixel min/max pairs,
// so the drawn envelope matches the full data.
std::string render_svg(const std::vector<double>& times, const PlotPanel& panel,
                       int width = 760, int height = 340);

// Panel from named channels of a trajectory. Throws UnknownChannel.
PlotPanel channel_panel(const Trajectory& traj, std::string file_stem,
                        std::string title, std::string y_label,
                        const std::vector<std::string>& channels);

}  // namespace crmlab
