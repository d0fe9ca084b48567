#pragma once

#include <string>
#include <vector>

namespace least::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars, same length as y
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
};

/// Static SVG line chart with axes, ticks, markers and a legend.
std::string render_svg(const Chart& chart);

}  // namespace least::cli
