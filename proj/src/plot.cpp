#include "scabs/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "scabs/error.hpp"

namespace scabs {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

bool flag(const std::vector<char>& f, int i) { return i < static_cast<int>(f.size()) && f[i]; }

}  // namespace

void write_phase_svg(const PhasePlot& plot, std::ostream& out) {
  if (!plot.quantizer || plot.quantizer->dim() != 2) throw Error(Errc::InvalidArgument, "phase plots need a 2-D quantizer");
  const Quantizer& q = *plot.quantizer;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& c : q.cells()) {
    if (!c.polytope) continue;
    x0 = std::min(x0, c.bbox.lo(0));
    x1 = std::max(x1, c.bbox.hi(0));
    y0 = std::min(y0, c.bbox.lo(1));
    y1 = std::max(y1, c.bbox.hi(1));
  }
  const double margin = 30.0;
  const double scale = (plot.width_px - 2 * margin) / (x1 - x0);
  const double height = (y1 - y0) * scale + 2 * margin;
  auto px = [&](double x) { return fmt(margin + (x - x0) * scale); };
  auto py = [&](double y) { return fmt(margin + (y1 - y) * scale); };
  auto points = [&](const std::vector<Vec>& loop) {
    std::string s;
    for (const auto& v : loop) s += px(v(0)) + "," + py(v(1)) + " ";
    if (!s.empty()) s.pop_back();
    return s;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(plot.width_px) << "\" height=\""
      << fmt(height) << "\" viewBox=\"0 0 " << fmt(plot.width_px) << ' ' << fmt(height) << "\">\n";
  out << "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
         "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#444\" "
         "stroke-width=\"2\"/></pattern></defs>\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (int i = 0; i < q.size(); ++i) {
    const Cell& c = q.cell(i);
    if (!c.polytope) continue;
    std::string fill = "none";
    if (c.kind() == CellKind::Obstacle) fill = "url(#hatch)";
    else if (flag(plot.target, i)) fill = "#9ecae1";
    else if (flag(plot.winning, i)) fill = "#c7e9c0";
    const std::string stroke = flag(plot.start, i) ? "#d62728" : "#888";
    const std::string width = flag(plot.start, i) ? "2" : "0.6";
    out << "<polygon points=\"" << points(c.polytope->vertices()) << "\" fill=\"" << fill << "\" stroke=\""
        << stroke << "\" stroke-width=\"" << width << "\"/>\n";
  }
  if (plot.ellipse) {
    const Ellipsoid& e = *plot.ellipse;
    const Mat L = e.Q.llt().matrixL();
    const Mat Lt_inv = L.transpose().inverse();
    std::vector<Vec> loop;
    for (int k = 0; k < 200; ++k) {
      Vec w(2);
      w << std::cos(2 * M_PI * k / 200), std::sin(2 * M_PI * k / 200);
      loop.push_back(e.center + std::sqrt(e.level) * (Lt_inv * w));
    }
    out << "<polygon points=\"" << points(loop) << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"1.5\" "
        << "stroke-dasharray=\"5,3\"/>\n";
  }
  const int axis = q.periodic_axis();
  for (const auto& traj : plot.trajectories) {
    // wrap into the plotted period and break the line where it wraps
    std::vector<std::vector<Vec>> pieces(1);
    for (const auto& x : traj) {
      Vec y = x;
      if (axis >= 0) {
        const double lo = axis == 0 ? x0 : y0;
        y(axis) = lo + std::fmod(std::fmod(y(axis) - lo, q.period()) + q.period(), q.period());
      }
      if (!pieces.back().empty() && axis >= 0 &&
          std::abs(y(axis) - pieces.back().back()(axis)) > 0.5 * q.period()) {
        pieces.emplace_back();
      }
      pieces.back().push_back(y);
    }
    for (const auto& piece : pieces) {
      out << "<polyline points=\"" << points(piece) << "\" fill=\"none\" stroke=\"#e6550d\" stroke-width=\"1.5\"/>\n";
    }
    if (!traj.empty()) {
      out << "<circle cx=\"" << px(pieces.front().front()(0)) << "\" cy=\"" << py(pieces.front().front()(1))
          << "\" r=\"3\" fill=\"#e6550d\"/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace scabs
