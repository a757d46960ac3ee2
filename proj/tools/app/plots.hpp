#pragma once

#include <string>
#include <utility>
#include <vector>

namespace graphletqa::app {

struct Series {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

/// Standalone SVG bar chart with one bar per label.
std::string bar_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                          const std::vector<std::string>& labels, const std::vector<double>& values);

/// Log-log scatter; points with a non-positive coordinate are skipped.
std::string loglog_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

}  // namespace graphletqa::app
