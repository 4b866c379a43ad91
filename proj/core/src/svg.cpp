#include "sgmeta/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace sgmeta {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

struct Frame {
  Box bounds;
  double ppm;
  double margin = 20.0;
  double x(double px) const { return margin + (px - bounds.lo.x()) * ppm; }
  double y(double py) const { return margin + (bounds.hi.y() - py) * ppm; }
  double width() const { return 2 * margin + (bounds.hi.x() - bounds.lo.x()) * ppm; }
  double height() const { return 2 * margin + (bounds.hi.y() - bounds.lo.y()) * ppm; }
};

double sensing_cost(const Vec2& p, const Workspace& ws, const FollowerType& type) {
  double total = 0.0;
  for (const auto& obs : ws.obstacles) {
    total += sensing_penalty(type.c[3] * (scaled_distance(p, obs) - obs.safety_dist));
  }
  return total;
}

void polyline(std::ostringstream& out, const Frame& f, const std::vector<Vec2>& pts,
              const char* color, const char* extra) {
  if (pts.empty()) return;
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" " << extra << " points=\"";
  for (const auto& p : pts) out << num(f.x(p.x())) << ',' << num(f.y(p.y())) << ' ';
  out << "\"/>\n";
  out << "<circle cx=\"" << num(f.x(pts.front().x())) << "\" cy=\"" << num(f.y(pts.front().y()))
      << "\" r=\"4\" fill=\"" << color << "\"/>\n";
}

}  // namespace

std::string render_svg(const Workspace& ws, const std::vector<Trajectory>& trajectories,
                       const SvgOptions& opts) {
  const Frame f{ws.bounds, opts.pixels_per_meter};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f.width()) << "\" height=\""
      << num(f.height()) << "\" viewBox=\"0 0 " << num(f.width()) << ' ' << num(f.height()) << "\">\n";
  if (!opts.title.empty()) out << "<title>" << opts.title << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(f.width()) << "\" height=\"" << num(f.height())
      << "\" fill=\"white\"/>\n";

  if (opts.sensing_type) {
    const int n = std::max(1, opts.shading_cells);
    const Vec2 span = ws.bounds.hi - ws.bounds.lo;
    const double cap = 30.0;
    out << "<g id=\"sensing\" stroke=\"none\">\n";
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vec2 lo = ws.bounds.lo + Vec2(span.x() * i / n, span.y() * j / n);
        const Vec2 hi = ws.bounds.lo + Vec2(span.x() * (i + 1) / n, span.y() * (j + 1) / n);
        const double c = sensing_cost(0.5 * (lo + hi), ws, *opts.sensing_type);
        if (c <= 0.0) continue;
        const double level = std::isfinite(c) ? std::min(c, cap) / cap : 1.0;
        const int g = static_cast<int>(std::lround(255.0 * (1.0 - 0.8 * level)));
        out << "<rect class=\"cell\" x=\"" << num(f.x(lo.x())) << "\" y=\"" << num(f.y(hi.y()))
            << "\" width=\"" << num((hi.x() - lo.x()) * f.ppm) << "\" height=\""
            << num((hi.y() - lo.y()) * f.ppm) << "\" fill=\"rgb(255," << g << ',' << g << ")\"/>\n";
      }
    }
    out << "</g>\n";
  }

  out << "<rect x=\"" << num(f.x(ws.bounds.lo.x())) << "\" y=\"" << num(f.y(ws.bounds.hi.y()))
      << "\" width=\"" << num((ws.bounds.hi.x() - ws.bounds.lo.x()) * f.ppm) << "\" height=\""
      << num((ws.bounds.hi.y() - ws.bounds.lo.y()) * f.ppm)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  for (const auto& obs : ws.obstacles) {
    const double rx = obs.safety_dist / obs.scaling.x();
    const double ry = obs.safety_dist / obs.scaling.y();
    if (obs.norm == NormOrder::Inf) {
      out << "<rect class=\"obstacle\" x=\"" << num(f.x(obs.center.x() - rx)) << "\" y=\""
          << num(f.y(obs.center.y() + ry)) << "\" width=\"" << num(2 * rx * f.ppm) << "\" height=\""
          << num(2 * ry * f.ppm) << "\" fill=\"gray\" fill-opacity=\"0.6\" stroke=\"black\"/>\n";
    } else {
      out << "<ellipse class=\"obstacle\" cx=\"" << num(f.x(obs.center.x())) << "\" cy=\""
          << num(f.y(obs.center.y())) << "\" rx=\"" << num(rx * f.ppm) << "\" ry=\"" << num(ry * f.ppm)
          << "\" fill=\"gray\" fill-opacity=\"0.6\" stroke=\"black\"/>\n";
    }
  }

  out << "<circle class=\"destination\" cx=\"" << num(f.x(ws.destination.x())) << "\" cy=\""
      << num(f.y(ws.destination.y())) << "\" r=\"" << num(ws.goal_radius * f.ppm)
      << "\" fill=\"green\" fill-opacity=\"0.2\" stroke=\"green\"/>\n";
  out << "<path d=\"M " << num(f.x(ws.destination.x()) - 6) << ' ' << num(f.y(ws.destination.y()))
      << " h 12 M " << num(f.x(ws.destination.x())) << ' ' << num(f.y(ws.destination.y()) - 6)
      << " v 12\" stroke=\"green\" stroke-width=\"2\"/>\n";

  for (const auto& traj : trajectories) {
    std::vector<Vec2> leader;
    std::vector<Vec2> follower;
    for (const auto& x : traj.states) {
      if (traj.has_leader) leader.push_back(x.leader_pos);
      follower.push_back(x.follower_pos);
    }
    polyline(out, f, leader, "#1f77b4", "class=\"leader\" stroke-dasharray=\"6,3\"");
    polyline(out, f, follower, "#ff7f0e", "class=\"follower\"");
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace sgmeta
