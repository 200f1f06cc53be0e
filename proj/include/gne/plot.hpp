#pragma once

// Minimal self-contained SVG output for run summaries: line charts and an
// event raster. CSV files remain the ground truth; these are for eyeballing.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "gne/errors.hpp"
#include "gne/state.hpp"

namespace gne::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

namespace detail {

inline constexpr double kWidth = 720, kHeight = 420;
inline constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                           "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const {
    return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight);
  }
  double py(double y) const {
    return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

inline void open_svg(std::ofstream& out, const std::string& title) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

inline void axes(std::ofstream& out, const Frame& f, const std::string& xlabel,
                 const std::string& ylabel) {
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
      << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
    const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
    out << "<text x=\"" << f.px(xv) << "\" y=\"" << kHeight - kBottom + 16
        << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << f.py(yv) + 4
        << "\" text-anchor=\"end\">" << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
      << "\" text-anchor=\"middle\">" << escape(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 "
      << kHeight / 2 << ")\" text-anchor=\"middle\">" << escape(ylabel) << "</text>\n";
}

inline std::ofstream open_file(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write plot '" + path + "'");
  return out;
}

}  // namespace detail

inline void line_chart(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const std::vector<Series>& series) {
  using namespace detail;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if (!std::isfinite(s.y[k])) continue;
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  }
  if (!(x1 > x0)) { x0 = 0; x1 = 1; }
  if (!(y1 > y0)) { y0 = std::isfinite(y0) ? y0 - 1 : 0; y1 = y0 + 2; }
  const double pad = 0.05 * (y1 - y0);
  const Frame f{x0, x1, y0 - pad, y1 + pad};

  auto out = open_file(path);
  open_svg(out, title);
  axes(out, f, xlabel, ylabel);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % 8];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    // Thin dense series to at most ~2000 vertices.
    const std::size_t n = series[s].x.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 2000);
    for (std::size_t k = 0; k < n; k += stride) {
      out << fmt(f.px(series[s].x[k])) << "," << fmt(f.py(series[s].y[k])) << " ";
    }
    if (n > 0 && (n - 1) % stride != 0) {
      out << fmt(f.px(series[s].x[n - 1])) << "," << fmt(f.py(series[s].y[n - 1]));
    }
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 16 * s
        << "\" text-anchor=\"end\" fill=\"" << color << "\">" << escape(series[s].label)
        << "</text>\n";
  }
  out << "</svg>\n";
}

/// One row of tick marks per player at its broadcast instants.
inline void event_raster(const std::string& path, const std::string& title,
                         const std::vector<Event>& events, int n_players, double horizon) {
  using namespace detail;
  const Frame f{0.0, horizon > 0 ? horizon : 1.0, 0.5, n_players + 0.5};
  auto out = open_file(path);
  open_svg(out, title);
  axes(out, f, "t", "player");
  for (const auto& ev : events) {
    const double y = f.py(ev.player + 1);
    out << "<line x1=\"" << fmt(f.px(ev.time)) << "\" x2=\"" << fmt(f.px(ev.time))
        << "\" y1=\"" << fmt(y - 10) << "\" y2=\"" << fmt(y + 10) << "\" stroke=\""
        << kPalette[ev.player % 8] << "\" stroke-width=\"0.8\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace gne::plot
