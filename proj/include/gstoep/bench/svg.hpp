#pragma once

// Minimal native SVG line charts with a log-scaled y axis.

#include <string>
#include <vector>

namespace gstoep::bench {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  // nonpositive or non-finite values are skipped
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

std::string line_chart_svg(const Chart& chart);

}  // namespace gstoep::bench
