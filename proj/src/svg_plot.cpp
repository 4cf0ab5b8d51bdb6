#include "latentcast/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "latentcast/common.hpp"

namespace latentcast {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 48;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string esc(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Axis {
  double lo = 0, hi = 1;
  double scale(double v, double a, double b) const {
    return hi == lo ? (a + b) / 2 : a + (v - lo) / (hi - lo) * (b - a);
  }
};

Axis fit_axis(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0, 1};
  if (lo == hi) return {lo - 0.5, hi + 0.5};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void ticks(std::ostringstream& svg, const Axis& ax, bool vertical) {
  for (int i = 0; i <= 4; ++i) {
    const double v = ax.lo + i * (ax.hi - ax.lo) / 4;
    if (vertical) {
      const double y = ax.scale(v, kHeight - kBottom, kTop);
      svg << "<line x1='" << kLeft - 4 << "' y1='" << num(y) << "' x2='" << kLeft
          << "' y2='" << num(y) << "' stroke='#333'/>\n";
      svg << "<text x='" << kLeft - 8 << "' y='" << num(y + 4)
          << "' text-anchor='end' font-size='11'>" << num(v) << "</text>\n";
    } else {
      const double x = ax.scale(v, kLeft, kWidth - kRight);
      svg << "<line x1='" << num(x) << "' y1='" << kHeight - kBottom << "' x2='" << num(x)
          << "' y2='" << kHeight - kBottom + 4 << "' stroke='#333'/>\n";
      svg << "<text x='" << num(x) << "' y='" << kHeight - kBottom + 18
          << "' text-anchor='middle' font-size='11'>" << num(v) << "</text>\n";
    }
  }
}

void frame(std::ostringstream& svg, const std::string& title, const std::string& x_label,
           const std::string& y_label) {
  svg << "<rect x='0' y='0' width='" << kWidth << "' height='" << kHeight
      << "' fill='white'/>\n";
  svg << "<text x='" << kWidth / 2 << "' y='22' text-anchor='middle' font-size='15'>"
      << esc(title) << "</text>\n";
  svg << "<rect x='" << kLeft << "' y='" << kTop << "' width='" << kWidth - kLeft - kRight
      << "' height='" << kHeight - kTop - kBottom << "' fill='none' stroke='#333'/>\n";
  svg << "<text x='" << kWidth / 2 << "' y='" << kHeight - 8
      << "' text-anchor='middle' font-size='12'>" << esc(x_label) << "</text>\n";
  svg << "<text x='14' y='" << kHeight / 2 << "' text-anchor='middle' font-size='12' "
      << "transform='rotate(-90 14 " << kHeight / 2 << ")'>" << esc(y_label) << "</text>\n";
}

void emit(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='"
      << kHeight << "' viewBox='0 0 " << kWidth << " " << kHeight << "'>\n"
      << body << "</svg>\n";
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace

void write_line_chart_svg(const std::string& path, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<PlotSeries>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const PlotSeries& s : series) {
    if (s.x.size() != s.y.size())
      throw ShapeError("line chart: series '" + s.label + "' has mismatched x/y");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xlo = std::min(xlo, s.x[i]), xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]), yhi = std::max(yhi, s.y[i]);
    }
  }
  const Axis xa = fit_axis(xlo, xhi), ya = fit_axis(ylo, yhi);

  std::ostringstream svg;
  frame(svg, title, x_label, y_label);
  ticks(svg, xa, false);
  ticks(svg, ya, true);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kPalette[si % std::size(kPalette)];
    std::string points;
    auto flush = [&] {
      if (!points.empty())
        svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='"
            << points << "'/>\n";
      points.clear();
    };
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      points += num(xa.scale(s.x[i], kLeft, kWidth - kRight)) + "," +
                num(ya.scale(s.y[i], kHeight - kBottom, kTop)) + " ";
    }
    flush();
    const double ly = kTop + 14 + 16 * static_cast<double>(si);
    svg << "<line x1='" << kWidth - kRight - 120 << "' y1='" << num(ly) << "' x2='"
        << kWidth - kRight - 100 << "' y2='" << num(ly) << "' stroke='" << color
        << "' stroke-width='2'/>\n";
    svg << "<text x='" << kWidth - kRight - 94 << "' y='" << num(ly + 4)
        << "' font-size='11'>" << esc(s.label) << "</text>\n";
  }
  emit(path, svg.str());
}

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& labels,
                         const std::vector<double>& values) {
  if (labels.size() != values.size())
    throw ShapeError("bar chart: labels and values differ in length");
  if (values.empty()) throw ShapeError("bar chart: nothing to draw");
  double hi = 0;
  for (double v : values)
    if (std::isfinite(v)) hi = std::max(hi, v);
  const Axis ya = fit_axis(0, hi > 0 ? hi : 1);

  std::ostringstream svg;
  frame(svg, title, "", "");
  ticks(svg, ya, true);
  const double span = kWidth - kLeft - kRight;
  const double slot = span / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::max(values[i], 0.0) : 0.0;
    const double x = kLeft + slot * (static_cast<double>(i) + 0.15);
    const double y = ya.scale(v, kHeight - kBottom, kTop);
    svg << "<rect x='" << num(x) << "' y='" << num(y) << "' width='" << num(slot * 0.7)
        << "' height='" << num(kHeight - kBottom - y) << "' fill='"
        << kPalette[0] << "'/>\n";
    svg << "<text x='" << num(x + slot * 0.35) << "' y='" << kHeight - kBottom + 18
        << "' text-anchor='middle' font-size='10'>" << esc(labels[i]) << "</text>\n";
  }
  emit(path, svg.str());
}

void write_heatmap_svg(const std::string& path, const std::string& title,
                       const torch::Tensor& matrix,
                       const std::vector<std::string>& row_labels,
                       const std::vector<std::string>& col_labels) {
  if (matrix.dim() != 2) throw ShapeError("heatmap: matrix must be rank 2");
  const std::int64_t rows = matrix.size(0), cols = matrix.size(1);
  if (static_cast<std::int64_t>(row_labels.size()) != rows ||
      static_cast<std::int64_t>(col_labels.size()) != cols)
    throw ShapeError("heatmap: label counts do not match the matrix");
  const torch::Tensor m = matrix.to(torch::kFloat64);
  double scale = 0;
  {
    const torch::Tensor finite = m.masked_select(torch::isfinite(m));
    if (finite.numel() > 0) scale = finite.abs().max().item<double>();
  }
  if (scale == 0) scale = 1;

  std::ostringstream svg;
  frame(svg, title, "", "");
  const double cw = (kWidth - kLeft - kRight) / static_cast<double>(cols);
  const double ch = (kHeight - kTop - kBottom) / static_cast<double>(rows);
  for (std::int64_t r = 0; r < rows; ++r) {
    for (std::int64_t c = 0; c < cols; ++c) {
      const double v = m[r][c].item<double>();
      std::string fill = "#bbbbbb";  // undefined cell
      if (std::isfinite(v)) {
        const double t = std::clamp(v / scale, -1.0, 1.0);
        // blue (-1) .. white (0) .. red (+1)
        const int rr = static_cast<int>(std::lround(255 * (t >= 0 ? 1.0 : 1.0 + t)));
        const int gg = static_cast<int>(std::lround(255 * (1.0 - std::abs(t))));
        const int bb = static_cast<int>(std::lround(255 * (t <= 0 ? 1.0 : 1.0 - t)));
        char buf[8];
        std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", rr, gg, bb);
        fill = buf;
      }
      svg << "<rect x='" << num(kLeft + cw * static_cast<double>(c)) << "' y='"
          << num(kTop + ch * static_cast<double>(r)) << "' width='" << num(cw)
          << "' height='" << num(ch) << "' fill='" << fill << "' stroke='#eee'/>\n";
    }
    svg << "<text x='" << kLeft - 6 << "' y='"
        << num(kTop + ch * (static_cast<double>(r) + 0.5) + 4)
        << "' text-anchor='end' font-size='10'>" << esc(row_labels[static_cast<std::size_t>(r)])
        << "</text>\n";
  }
  for (std::int64_t c = 0; c < cols; ++c)
    svg << "<text x='" << num(kLeft + cw * (static_cast<double>(c) + 0.5)) << "' y='"
        << kHeight - kBottom + 14 << "' text-anchor='middle' font-size='10'>"
        << esc(col_labels[static_cast<std::size_t>(c)]) << "</text>\n";
  emit(path, svg.str());
}

}  // namespace latentcast
