#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace ttr {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr double kLogFloor = 1e-16;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

std::string line_chart_svg(const std::vector<Series>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label) {
  if (series.empty()) throw std::invalid_argument("no series to plot");
  double xmin = 1e300, xmax = -1e300, lymin = 1e300, lymax = -1e300;
  for (const Series& s : series) {
    for (const SeriesPoint& p : s.points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      const double ly = std::log10(std::max(p.y, kLogFloor));
      lymin = std::min(lymin, ly);
      lymax = std::max(lymax, ly);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (lymax <= lymin) lymax = lymin + 1.0;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) {
    const double ly = std::log10(std::max(y, kLogFloor));
    return kTop + (lymax - ly) / (lymax - lymin) * ph;
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // Frame and ticks.
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw
      << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  const int nticks = 5;
  for (int i = 0; i <= nticks; ++i) {
    const double fx = xmin + (xmax - xmin) * i / nticks;
    const double px = sx(fx);
    svg << "<line x1=\"" << num(px) << "\" y1=\"" << num(kTop + ph)
        << "\" x2=\"" << num(px) << "\" y2=\"" << num(kTop + ph + 5)
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << num(px) << "\" y=\"" << num(kTop + ph + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << sci(fx) << "</text>\n";
    const double ly = lymin + (lymax - lymin) * i / nticks;
    const double py = kTop + ph - (ly - lymin) / (lymax - lymin) * ph;
    svg << "<line x1=\"" << num(kLeft - 5) << "\" y1=\"" << num(py)
        << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(py)
        << "\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << num(kLeft - 8) << "\" y=\"" << num(py + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">1e"
        << sci(ly) << "</text>\n";
  }
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << kHeight / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(*kPalette))];
    svg << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (const SeriesPoint& p : series[i].points)
      svg << num(sx(p.x)) << ',' << num(sy(p.y)) << ' ';
    svg << "\"/>\n";
    svg << "<text x=\"" << num(kLeft + pw - 6) << "\" y=\""
        << num(kTop + 16 + 16 * static_cast<double>(i))
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\" fill=\""
        << color << "\">" << series[i].name << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string heatmap_svg(const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values,
                        const std::string& title) {
  if (values.empty() || values.size() != row_labels.size())
    throw std::invalid_argument("heatmap shape mismatch");
  const std::size_t rows = values.size();
  const std::size_t cols = col_labels.size();
  for (const auto& row : values)
    if (row.size() != cols) throw std::invalid_argument("ragged heatmap grid");

  const double cell = 48.0;
  const double left = 90.0, top = 50.0;
  const double width = left + cell * static_cast<double>(cols) + 30.0;
  const double height = top + cell * static_cast<double>(rows) + 60.0;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << " "
      << height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"26\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = std::clamp(values[r][c], 0.0, 1.0);
      // White (0) to deep blue (1).
      const int red = static_cast<int>(std::lround(255.0 * (1.0 - v)));
      const int green = static_cast<int>(std::lround(255.0 - 170.0 * v));
      const int blue = static_cast<int>(std::lround(255.0 - 90.0 * v));
      char color[8];
      std::snprintf(color, sizeof(color), "#%02x%02x%02x", red, green, blue);
      const double x = left + cell * static_cast<double>(c);
      const double y = top + cell * static_cast<double>(r);
      svg << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
          << num(cell) << "\" height=\"" << num(cell) << "\" fill=\"" << color
          << "\" stroke=\"#666\" stroke-width=\"0.5\"/>\n";
      svg << "<text x=\"" << num(x + cell / 2) << "\" y=\""
          << num(y + cell / 2 + 4)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"11\" fill=\""
          << (v > 0.55 ? "#ffffff" : "#222222") << "\">" << sci(v)
          << "</text>\n";
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    svg << "<text x=\"" << num(left - 8) << "\" y=\""
        << num(top + cell * (static_cast<double>(r) + 0.5) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << row_labels[r] << "</text>\n";
  for (std::size_t c = 0; c < cols; ++c)
    svg << "<text x=\"" << num(left + cell * (static_cast<double>(c) + 0.5))
        << "\" y=\"" << num(top + cell * static_cast<double>(rows) + 20)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"12\">"
        << col_labels[c] << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace ttr
