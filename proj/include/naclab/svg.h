#pragma once

#include <string>
#include <vector>

#include "naclab/sim.h"

namespace naclab {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<Series> series;
};

/// Panels stacked vertically, one polyline per series, at most
/// `max_points` vertices per polyline (uniform stride, last point kept).
std::string render_svg(const std::vector<Panel>& panels, int width = 900,
                       int panel_height = 300, std::size_t max_points = 2000);

/// y_i(t) for every output channel.
Panel output_panel(const Trajectory& tr, const std::string& title);
/// One panel per channel: u_i(t) against -y_i(t).
std::vector<Panel> input_panels(const Trajectory& tr);
/// |y(t)| for two runs on shared axes.
Panel overlay_panel(const Trajectory& a, const std::string& label_a, const Trajectory& b,
                    const std::string& label_b);

}  // namespace naclab
