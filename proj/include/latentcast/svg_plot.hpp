#pragma once

#include <torch/torch.h>

#include <string>
#include <vector>

namespace latentcast {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;  // a non-finite y breaks the polyline
};

/// Self-contained SVG line chart (axes, ticks, legend). Undefined points
/// split a series into segments instead of being drawn.
void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series);

/// Vertical bar chart with one bar per label.
void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values);

/// Diverging-color heatmap of a [R, C] matrix scaled to max |value|; NaN
/// cells are drawn gray.
void write_heatmap_svg(const std::string& path, const std::string& title,
                       const torch::Tensor& matrix,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels);

}  // namespace latentcast
