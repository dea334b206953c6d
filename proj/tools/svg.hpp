// Minimal static SVG output for scatter and line plots; no dependencies.
#ifndef TKMERGE_TOOLS_SVG_HPP
#define TKMERGE_TOOLS_SVG_HPP

#include "tkmerge/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

namespace tkmerge::svg {

// Trimmed points (label 0) draw in red, clusters cycle through the rest.
inline const char* label_color(int label) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e",
                                  "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};
  if (label <= 0) return palette[0];
  return palette[1 + (label - 1) % 9];
}

inline void scatter(const std::string& path, const Matrix& points, const std::vector<int>& labels,
                    const std::string& title) {
  const double w = 640.0, h = 640.0, margin = 40.0;
  double xmin = points.col(0).minCoeff(), xmax = points.col(0).maxCoeff();
  double ymin = points.col(1).minCoeff(), ymax = points.col(1).maxCoeff();
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
  auto sy = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
         "font-size='16'>" << title << "</text>\n";
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const int label = i < static_cast<Eigen::Index>(labels.size()) ? labels[i] : 1;
    out << "<circle cx='" << sx(points(i, 0)) << "' cy='" << sy(points(i, 1))
        << "' r='2.2' fill='" << label_color(label) << "' fill-opacity='0.75'/>\n";
  }
  out << "</svg>\n";
}

inline void line_chart(const std::string& path, const std::vector<double>& xs,
                       const std::vector<double>& ys, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
  const double w = 640.0, h = 420.0, margin = 56.0;
  double xmin = xs.front(), xmax = xs.front(), ymin = 0.0, ymax = 1.0;
  for (double x : xs) {
    xmin = std::min(xmin, x);
    xmax = std::max(xmax, x);
  }
  for (double y : ys) {
    if (std::isfinite(y)) {
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
  auto sy = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

  std::ofstream out(path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-family='sans-serif' "
         "font-size='16'>" << title << "</text>\n";
  out << "<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin << "' y2='"
      << h - margin << "' stroke='black'/>\n";
  out << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
      << h - margin << "' stroke='black'/>\n";
  out << "<text x='" << w / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-family='sans-serif' font-size='12'>" << x_label
      << "</text>\n";
  out << "<text x='16' y='" << h / 2
      << "' text-anchor='middle' font-family='sans-serif' font-size='12' transform='rotate(-90 16 "
      << h / 2 << ")'>" << y_label << "</text>\n";

  std::string poly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    poly += std::to_string(sx(xs[i])) + "," + std::to_string(sy(ys[i])) + " ";
  }
  out << "<polyline points='" << poly << "' fill='none' stroke='#1f77b4' stroke-width='2'/>\n";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    out << "<circle cx='" << sx(xs[i]) << "' cy='" << sy(ys[i]) << "' r='3' fill='#1f77b4'/>\n";
  }
  out << "</svg>\n";
}

}  // namespace tkmerge::svg

#endif
