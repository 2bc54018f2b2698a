#include "rsg/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace rsg {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s(buf);
  if (s == "-0.00") s = "0.00";
  return s;
}

struct View {
  Vec2 lo;
  double scale;
  double size;
  double margin;

  Vec2 operator()(const Vec2& p) const {
    return Vec2(margin + (p.x() - lo.x()) * scale, size - margin - (p.y() - lo.y()) * scale);
  }
};

const char* effect_color(Effect e) {
  switch (e) {
    case Effect::Stabilization: return "#1a7f37";
    case Effect::Destabilization: return "#c62828";
    case Effect::None: return "#777777";
  }
  return "#777777";
}

std::string path_of(const std::vector<Vec2>& pts) {
  std::ostringstream o;
  for (std::size_t i = 0; i < pts.size(); ++i) o << (i ? " L" : "M") << num(pts[i].x()) << " " << num(pts[i].y());
  return o.str();
}

// Polyline shifted by `offset` pixels toward the gray side. Flipping y maps the image right
// normal of a direction onto (-s.y, s.x) for the screen direction s.
std::vector<Vec2> gray_band(const std::vector<Vec2>& screen, Side side, double offset) {
  std::vector<Vec2> out;
  const double sign = side == Side::Right ? 1.0 : -1.0;
  for (std::size_t i = 0; i < screen.size(); ++i) {
    const Vec2 a = screen[i == 0 ? 0 : i - 1];
    const Vec2 b = screen[std::min(i + 1, screen.size() - 1)];
    Vec2 d = b - a;
    const double n = d.norm();
    if (n == 0.0) continue;
    d /= n;
    out.push_back(screen[i] + sign * offset * Vec2(-d.y(), d.x()));
  }
  return out;
}

}  // namespace

std::string render_svg(const Graphic& g, const std::vector<SweepEvent>& events, const RenderOptions& options) {
  const BoundingBox box = g.bounding_box();
  const double size = options.size, margin = options.margin;
  const double extent = std::max({box.max.x() - box.min.x(), box.max.y() - box.min.y(), 1e-9});
  const double scale = (size - 2.0 * margin) / extent;
  const Vec2 center = 0.5 * (box.min + box.max);
  const Vec2 lo = center - Vec2::Constant(0.5 * extent);
  const View view{lo, scale, size, margin};

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.size << "\" height=\"" << options.size
    << "\" viewBox=\"0 0 " << options.size << " " << options.size << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  o << "<g id=\"gray\" fill=\"none\" stroke=\"#bbbbbb\" stroke-opacity=\"0.6\" stroke-width=\"8\">\n";
  for (const Loop& loop : g.loops)
    for (const Arc& arc : loop.arcs) {
      if (arc.label != FoldLabel::Definite || arc.gray_side == Side::None) continue;
      std::vector<Vec2> screen;
      for (const Vec2& p : arc.points) screen.push_back(view(p));
      o << "<path d=\"" << path_of(gray_band(screen, arc.gray_side, 5.0)) << "\"/>\n";
    }
  o << "</g>\n";

  o << "<g id=\"arcs\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\">\n";
  for (std::size_t l = 0; l < g.loops.size(); ++l)
    for (std::size_t a = 0; a < g.loops[l].arcs.size(); ++a) {
      const Arc& arc = g.loops[l].arcs[a];
      std::vector<Vec2> screen;
      for (const Vec2& p : arc.points) screen.push_back(view(p));
      o << "<path class=\"" << to_string(arc.label) << "\" d=\"" << path_of(screen) << "\"";
      if (arc.label == FoldLabel::Indefinite) o << " stroke-dasharray=\"6 4\"";
      o << "/>\n";
    }
  o << "</g>\n";

  o << "<g id=\"features\">\n";
  for (const Loop& loop : g.loops)
    for (const Feature& f : loop.features) {
      const Vec2 p = view(f.position);
      const char* fill = f.kind == FeatureKind::Cusp ? "#6a1b9a" : f.kind == FeatureKind::Inflection ? "#ffffff" : "#1565c0";
      o << "<circle class=\"" << to_string(f.kind) << "\" cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y())
        << "\" r=\"3\" fill=\"" << fill << "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    }
  for (const Crossing& c : g.crossings) {
    const Vec2 p = view(c.position);
    o << "<path class=\"crossing\" d=\"M" << num(p.x() - 4) << " " << num(p.y() - 4) << " L" << num(p.x() + 4) << " "
      << num(p.y() + 4) << " M" << num(p.x() - 4) << " " << num(p.y() + 4) << " L" << num(p.x() + 4) << " "
      << num(p.y() - 4) << "\" stroke=\"#e65100\" stroke-width=\"1.5\"/>\n";
  }
  o << "</g>\n";

  if (!events.empty()) {
    o << "<g id=\"events\" font-family=\"monospace\" font-size=\"11\">\n";
    for (std::size_t k = 0; k < events.size(); ++k) {
      const SweepEvent& e = events[k];
      const Vec2 p = view(e.position);
      const char* color = effect_color(e.effect);
      o << "<circle class=\"event " << to_string(e.effect) << "\" cx=\"" << num(p.x()) << "\" cy=\"" << num(p.y())
        << "\" r=\"6\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      o << "<text x=\"" << num(p.x() + 7) << "\" y=\"" << num(p.y() - 7) << "\" fill=\"" << color << "\">" << k + 1
        << "</text>\n";
    }
    o << "</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace rsg
