#include "pcbf_cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pcbf/error.hpp"

namespace pcbf::cli {

namespace {

constexpr double kLeft = 70.0, kRight = 20.0, kTop = 28.0, kBottom = 36.0;
constexpr std::size_t kMaxPoints = 4000;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(lo <= hi)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      const double d = std::max(std::abs(lo) * 0.1, 1e-6);
      lo -= d, hi += d;
    } else {
      const double d = 0.05 * (hi - lo);
      lo -= d, hi += d;
    }
  }
};

void draw_panel(std::ostringstream& o, const Panel& p, double top, double width, double height) {
  const double x0 = kLeft, x1 = width - kRight, y0 = top + kTop, y1 = top + height - kBottom;
  Range rx, ry;
  for (const auto& s : p.series) {
    for (double v : s.x) rx.add(v);
    for (double v : s.y) ry.add(v);
  }
  for (double h : p.hlines) ry.add(h);
  if (!(rx.lo <= rx.hi)) throw IoError("plot panel '" + p.title + "' has no data");
  if (rx.hi - rx.lo < 1e-12) rx.hi = rx.lo + 1.0;
  ry.pad();
  auto sx = [&](double v) { return x0 + (v - rx.lo) / (rx.hi - rx.lo) * (x1 - x0); };
  auto sy = [&](double v) { return y1 - (v - ry.lo) / (ry.hi - ry.lo) * (y1 - y0); };

  o << "<text x=\"" << fmt(x0) << "\" y=\"" << fmt(top + 18) << "\" font-size=\"14\">" << escape(p.title) << "</text>\n";
  o << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y0) << "\" width=\"" << fmt(x1 - x0) << "\" height=\"" << fmt(y1 - y0)
    << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (double t : nice_ticks(rx.lo, rx.hi)) {
    o << "<line x1=\"" << fmt(sx(t)) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(sx(t)) << "\" y2=\"" << fmt(y1 + 4)
      << "\" stroke=\"#444\"/><text x=\"" << fmt(sx(t)) << "\" y=\"" << fmt(y1 + 16)
      << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : nice_ticks(ry.lo, ry.hi)) {
    o << "<line x1=\"" << fmt(x0 - 4) << "\" y1=\"" << fmt(sy(t)) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(sy(t))
      << "\" stroke=\"#ddd\"/><text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(sy(t) + 3)
      << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  o << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y1 + 30) << "\" font-size=\"11\" text-anchor=\"middle\">"
    << escape(p.x_label) << "</text>\n";
  o << "<text x=\"14\" y=\"" << fmt((y0 + y1) / 2) << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << fmt((y0 + y1) / 2) << ")\">" << escape(p.y_label) << "</text>\n";
  for (double h : p.hlines) {
    o << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(sy(h)) << "\" x2=\"" << fmt(x1) << "\" y2=\"" << fmt(sy(h))
      << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  }
  double legend_y = y0 + 12;
  for (const auto& s : p.series) {
    const std::size_t n = std::min(s.x.size(), s.y.size());
    const std::size_t stride = std::max<std::size_t>(1, n / kMaxPoints);
    o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.2\"";
    if (s.dashed) o << " stroke-dasharray=\"5 3\"";
    o << " points=\"";
    for (std::size_t i = 0; i < n; i += stride) {
      if (!std::isfinite(s.y[i])) continue;
      o << fmt(sx(s.x[i])) << ',' << fmt(sy(s.y[i])) << ' ';
    }
    if (n > 0 && (n - 1) % stride != 0 && std::isfinite(s.y[n - 1])) o << fmt(sx(s.x[n - 1])) << ',' << fmt(sy(s.y[n - 1]));
    o << "\"/>\n";
    if (!s.label.empty()) {
      o << "<line x1=\"" << fmt(x1 - 110) << "\" y1=\"" << fmt(legend_y - 4) << "\" x2=\"" << fmt(x1 - 90) << "\" y2=\""
        << fmt(legend_y - 4) << "\" stroke=\"" << s.color << "\"" << (s.dashed ? " stroke-dasharray=\"5 3\"" : "")
        << "/><text x=\"" << fmt(x1 - 86) << "\" y=\"" << fmt(legend_y) << "\" font-size=\"10\">" << escape(s.label)
        << "</text>\n";
      legend_y += 14;
    }
  }
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int count) {
  std::vector<double> out;
  if (!(hi > lo) || count < 1) return out;
  const double raw = (hi - lo) / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) break;
  }
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

std::string render_svg(const std::vector<Panel>& panels, double width, double panel_height) {
  if (panels.empty()) throw IoError("nothing to plot");
  std::ostringstream o;
  const double height = panel_height * static_cast<double>(panels.size());
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
    << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\" font-family=\"sans-serif\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) draw_panel(o, panels[i], panel_height * static_cast<double>(i), width, panel_height);
  o << "</svg>\n";
  return o.str();
}

}  // namespace pcbf::cli
