#pragma once

#include <string>
#include <vector>

#include "tensor.hpp"

namespace ttr {

struct SeriesPoint {
  double x = 0.0;
  double y = 0.0;
};

struct Series {
  std::string name;
  std::vector<SeriesPoint> points;
};

/// Line chart with a log10 y axis; one polyline per series, one vertex per
/// point. Pure text output, byte-deterministic for fixed input.
std::string line_chart_svg(const std::vector<Series>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label);

/// Heatmap with one rectangle per grid cell; values are clamped to [0, 1].
std::string heatmap_svg(const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values,
                        const std::string& title);

}  // namespace ttr
