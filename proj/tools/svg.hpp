#pragma once

#include <string>
#include <vector>

namespace nosc::cli {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

// Minimal line chart: axes with min/max tick labels, one polyline per series
// and a legend. Non-finite points are skipped.
std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<Series>& series);
void write_line_chart(const std::string& path, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::vector<Series>& series);

}  // namespace nosc::cli
