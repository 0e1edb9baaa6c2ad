#pragma once

// Minimal SVG output: line charts and histogram-with-density figures.

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hybridexec/stats.hpp"

namespace hybridexec {

namespace svg_detail {

constexpr int kWidth = 720, kHeight = 440, kMargin = 50;

inline double sx(double x, double lo, double hi) {
  return kMargin + (x - lo) / (hi - lo) * (kWidth - 2 * kMargin);
}
inline double sy(double y, double lo, double hi) {
  return kHeight - kMargin - (y - lo) / (hi - lo) * (kHeight - 2 * kMargin);
}

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#2a7e3f", "#2060c0", "#c03030",
                                 "#e08020", "#707070", "#9040a0"};
  return colors[i % 6];
}

}  // namespace svg_detail

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

inline void write_line_chart_svg(const std::vector<SvgSeries>& series,
                                 const std::string& title,
                                 const std::string& path) {
  using namespace svg_detail;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i]);
      yhi = std::max(yhi, s.y[i]);
    }
  if (yhi == ylo) yhi = ylo + 1.0;
  if (xhi == xlo) xhi = xlo + 1.0;

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  out << "<line x1='" << kMargin << "' y1='" << kHeight - kMargin << "' x2='"
      << kWidth - kMargin << "' y2='" << kHeight - kMargin
      << "' stroke='black'/>\n"
      << "<line x1='" << kMargin << "' y1='" << kMargin << "' x2='" << kMargin
      << "' y2='" << kHeight - kMargin << "' stroke='black'/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    out << "<polyline fill='none' stroke='" << palette(s)
        << "' stroke-width='1.5' points='";
    for (std::size_t i = 0; i < series[s].x.size(); ++i)
      out << sx(series[s].x[i], xlo, xhi) << "," << sy(series[s].y[i], ylo, yhi)
          << " ";
    out << "'/>\n";
    out << "<text x='" << kWidth - kMargin - 150 << "' y='"
        << kMargin + 18 * (s + 1) << "' font-family='sans-serif' "
        << "font-size='12' fill='" << palette(s) << "'>" << series[s].label
        << "</text>\n";
  }
  out << "</svg>\n";
}

// Histogram bars with the KDE curve overlaid, one sample set per figure.
inline void write_histogram_svg(const std::vector<double>& samples, int bins,
                                const std::string& title,
                                const std::string& path) {
  using namespace svg_detail;
  const Histogram h = histogram(samples, bins);
  const double bw = silverman_bandwidth(samples);
  const double lo = h.edges.front() - 2 * bw, hi = h.edges.back() + 2 * bw;
  std::vector<double> grid(256);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = lo + (hi - lo) * static_cast<double>(i) / (grid.size() - 1);
  const std::vector<double> dens = kde(samples, grid, bw);

  // Express bar heights in density units so the overlay shares the axis.
  const double binw = h.edges[1] - h.edges[0];
  const double n = static_cast<double>(samples.size());
  double ymax = *std::max_element(dens.begin(), dens.end());
  std::vector<double> bar(h.counts.size());
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    bar[i] = static_cast<double>(h.counts[i]) / (n * binw);
    ymax = std::max(ymax, bar[i]);
  }

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth
      << "' height='" << kHeight << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='" << kWidth / 2 << "' y='24' text-anchor='middle' "
      << "font-family='sans-serif' font-size='15'>" << title << "</text>\n";
  for (std::size_t i = 0; i < bar.size(); ++i) {
    const double x0 = sx(h.edges[i], lo, hi);
    const double x1 = sx(h.edges[i + 1], lo, hi);
    const double y = sy(bar[i], 0.0, ymax);
    out << "<rect x='" << x0 << "' y='" << y << "' width='" << x1 - x0
        << "' height='" << sy(0.0, 0.0, ymax) - y
        << "' fill='#9bbfe0' stroke='#5580aa'/>\n";
  }
  out << "<polyline fill='none' stroke='#c03030' stroke-width='1.8' points='";
  for (std::size_t i = 0; i < grid.size(); ++i)
    out << sx(grid[i], lo, hi) << "," << sy(dens[i], 0.0, ymax) << " ";
  out << "'/>\n</svg>\n";
}

}  // namespace hybridexec
