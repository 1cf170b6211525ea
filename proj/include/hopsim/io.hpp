#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "hopsim/hybrid.hpp"

namespace hopsim {

// Minimal static SVG phase-portrait emitter: one polyline per segment over the
// chosen pair of state columns.
inline void write_phase_svg(std::ostream& os, const HybridExecution& ex, int col_x,
                            int col_y, const std::string& label_x,
                            const std::string& label_y) {
  constexpr double W = 640, H = 480, M = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& seg : ex.segments) {
    for (const auto& s : seg.states) {
      xmin = std::min(xmin, s[col_x]);
      xmax = std::max(xmax, s[col_x]);
      ymin = std::min(ymin, s[col_y]);
      ymax = std::max(ymax, s[col_y]);
    }
  }
  if (xmax <= xmin) xmax = xmin + 1;
  if (ymax <= ymin) ymax = ymin + 1;
  const double padx = 0.05 * (xmax - xmin), pady = 0.05 * (ymax - ymin);
  xmin -= padx; xmax += padx; ymin -= pady; ymax += pady;
  auto px = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
  auto py = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
     << H - M << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << M << "\" y1=\"" << M << "\" x2=\"" << M << "\" y2=\"" << H - M
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" "
     << "font-size=\"14\">" << label_x << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"14\" "
     << "transform=\"rotate(-90 16 " << H / 2 << ")\">" << label_y << "</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728"};
  char buf[64];
  for (const auto& seg : ex.segments) {
    os << "<polyline fill=\"none\" stroke=\"" << colors[seg.mode % 2]
       << "\" stroke-width=\"1\" points=\"";
    for (const auto& s : seg.states) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(s[col_x]), py(s[col_y]));
      os << buf;
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
}

}  // namespace hopsim
