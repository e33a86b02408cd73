// Minimal static SVG line charts.
#pragma once

#include <string>
#include <vector>

namespace pcbf::cli {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::string x_label = "t";
  std::string y_label;
  std::vector<Series> series;
  std::vector<double> hlines;  // dashed red reference lines
};

/// Panels stacked vertically in one document. Throws IoError when there is
/// nothing to draw.
std::string render_svg(const std::vector<Panel>& panels, double width = 720.0, double panel_height = 220.0);

/// Roughly `count` round tick positions covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int count = 5);

}  // namespace pcbf::cli
