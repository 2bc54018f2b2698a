#include "rsg/graphic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsg/error.hpp"

namespace rsg {

int Loop::cusp_count() const {
  return static_cast<int>(std::count_if(features.begin(), features.end(),
                                        [](const Feature& f) { return f.kind == FeatureKind::Cusp; }));
}

int Graphic::cusp_count() const {
  int n = 0;
  for (const auto& l : loops) n += l.cusp_count();
  return n;
}

BoundingBox Graphic::bounding_box() const {
  BoundingBox box;
  box.min = Vec2::Constant(std::numeric_limits<double>::infinity());
  box.max = Vec2::Constant(-std::numeric_limits<double>::infinity());
  bool any = false;
  for (const auto& loop : loops)
    for (const auto& arc : loop.arcs)
      for (const auto& p : arc.points) {
        box.min = box.min.cwiseMin(p);
        box.max = box.max.cwiseMax(p);
        any = true;
      }
  if (!any) box.min = box.max = Vec2::Zero();
  return box;
}

const char* to_string(FoldLabel v) { return v == FoldLabel::Definite ? "d" : "i"; }

const char* to_string(Side v) {
  switch (v) {
    case Side::Left: return "left";
    case Side::Right: return "right";
    case Side::None: return "none";
  }
  return "none";
}

const char* to_string(FeatureKind v) {
  switch (v) {
    case FeatureKind::Horizontal: return "horizontal";
    case FeatureKind::Vertical: return "vertical";
    case FeatureKind::Cusp: return "cusp";
    case FeatureKind::Inflection: return "inflection";
    case FeatureKind::CrossingRef: return "crossing_ref";
  }
  return "";
}

const char* to_string(Convexity v) {
  switch (v) {
    case Convexity::Up: return "up";
    case Convexity::Down: return "down";
    case Convexity::Left: return "left";
    case Convexity::Right: return "right";
    case Convexity::None: return "none";
  }
  return "none";
}

const char* to_string(SlopeSign v) {
  switch (v) {
    case SlopeSign::Positive: return "positive";
    case SlopeSign::Negative: return "negative";
    case SlopeSign::Zero: return "zero";
    case SlopeSign::Infinite: return "infinite";
  }
  return "";
}

const char* to_string(Rule v) {
  static const char* names[] = {"V0", "V1", "V2", "V3", "V4", "V5", "V6"};
  return names[static_cast<int>(v)];
}

SlopeSign slope_sign_of_direction(const Vec2& d, double tolerance) {
  if (std::abs(d.y()) <= tolerance) return SlopeSign::Zero;
  if (std::abs(d.x()) <= tolerance) return SlopeSign::Infinite;
  return (d.x() > 0) == (d.y() > 0) ? SlopeSign::Positive : SlopeSign::Negative;
}

std::vector<Vec2> branch_before(const Loop& loop, std::size_t feature, std::size_t count) {
  std::vector<Vec2> out;
  // Walk backwards through as many arcs as needed.
  std::size_t arc = (feature + loop.arcs.size() - 1) % loop.arcs.size();
  for (std::size_t hops = 0; hops < loop.arcs.size() && out.size() < count; ++hops) {
    const auto& pts = loop.arcs[arc].points;
    for (std::size_t k = pts.size() >= 2 ? pts.size() - 1 : 0; k-- > 0 && out.size() < count;)
      out.push_back(pts[k]);
    arc = (arc + loop.arcs.size() - 1) % loop.arcs.size();
  }
  return out;
}

std::vector<Vec2> branch_after(const Loop& loop, std::size_t feature, std::size_t count) {
  std::vector<Vec2> out;
  std::size_t arc = feature % loop.arcs.size();
  for (std::size_t hops = 0; hops < loop.arcs.size() && out.size() < count; ++hops) {
    const auto& pts = loop.arcs[arc].points;
    for (std::size_t k = 1; k < pts.size() && out.size() < count; ++k) out.push_back(pts[k]);
    arc = (arc + 1) % loop.arcs.size();
  }
  return out;
}

Vec2 traversal_direction(const Loop& loop, std::size_t feature) {
  const auto before = branch_before(loop, feature, 1);
  const auto after = branch_after(loop, feature, 1);
  if (before.empty() || after.empty()) return Vec2::Zero();
  const Vec2 d = after.front() - before.front();
  const double n = d.norm();
  return n > 0 ? Vec2(d / n) : Vec2::Zero();
}

int side_of_tip_line(const Vec2& tip, const Vec2& direction, const Vec2& p, double tolerance) {
  const Vec2 r = p - tip;
  const double cross = direction.x() * r.y() - direction.y() * r.x();
  if (cross > tolerance) return 1;
  if (cross < -tolerance) return -1;
  return 0;
}

const Feature& feature_at(const Graphic& g, FeatureRef ref) {
  return g.loops.at(static_cast<std::size_t>(ref.loop)).features.at(static_cast<std::size_t>(ref.feature));
}

// ---------------------------------------------------------------------------
// validate

namespace {

void add(std::vector<Violation>& out, Rule rule, int loop, int item, std::string message) {
  out.push_back({rule, loop, item, std::move(message)});
}

bool structurally_sound(const Loop& loop, int li, std::vector<Violation>& out) {
  bool ok = true;
  if (loop.features.empty()) {
    add(out, Rule::V0, li, -1, "loop has no features");
    return false;
  }
  if (loop.features.size() != loop.arcs.size()) {
    add(out, Rule::V0, li, -1, "feature and arc counts differ");
    return false;
  }
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& arc = loop.arcs[i];
    if (arc.points.size() < 2) {
      add(out, Rule::V0, li, static_cast<int>(i), "arc has fewer than two points");
      ok = false;
      continue;
    }
    if ((arc.points.front() - loop.features[i].position).norm() > kGraphicTolerance ||
        (arc.points.back() - loop.features[(i + 1) % n].position).norm() > kGraphicTolerance) {
      add(out, Rule::V0, li, static_cast<int>(i), "arc endpoints do not match its features");
      ok = false;
    }
    const auto& f = loop.features[i];
    if (f.kind == FeatureKind::Cusp) {
      if (!f.tip_direction || !f.branch_labels) {
        add(out, Rule::V0, li, static_cast<int>(i), "cusp without tip direction or branch labels");
        ok = false;
      } else if (std::abs(f.tip_direction->norm() - 1.0) > 1e-6) {
        add(out, Rule::V0, li, static_cast<int>(i), "cusp tip direction is not a unit vector");
        ok = false;
      }
    }
  }
  return ok;
}

void check_feature_geometry(const Loop& loop, int li, std::size_t i, std::vector<Violation>& out) {
  const Feature& f = loop.features[i];
  const auto prev = branch_before(loop, i, 1);
  const auto next = branch_after(loop, i, 1);
  if (prev.empty() || next.empty()) return;
  const Vec2& a = prev.front();
  const Vec2& b = next.front();
  const Vec2& p = f.position;
  const double tol = kGraphicTolerance;
  auto fail = [&](const std::string& why) {
    add(out, Rule::V6, li, static_cast<int>(i), std::string(to_string(f.kind)) + ": " + why);
  };
  switch (f.kind) {
    case FeatureKind::Horizontal:
      if (f.convexity == Convexity::Down) {
        if (a.y() < p.y() - tol || b.y() < p.y() - tol) fail("convex-down point is not a local minimum of g");
      } else if (f.convexity == Convexity::Up) {
        if (a.y() > p.y() + tol || b.y() > p.y() + tol) fail("convex-up point is not a local maximum of g");
      } else {
        fail("horizontal point needs convexity up or down");
      }
      if (f.slope_sign != SlopeSign::Zero) fail("horizontal point must have zero slope");
      break;
    case FeatureKind::Vertical:
      if (f.convexity == Convexity::Left) {
        if (a.x() < p.x() - tol || b.x() < p.x() - tol) fail("convex-left point is not a local minimum of f");
      } else if (f.convexity == Convexity::Right) {
        if (a.x() > p.x() + tol || b.x() > p.x() + tol) fail("convex-right point is not a local maximum of f");
      } else {
        fail("vertical point needs convexity left or right");
      }
      if (f.slope_sign != SlopeSign::Infinite) fail("vertical point must have infinite slope");
      break;
    case FeatureKind::Inflection: {
      if (f.convexity != Convexity::None) fail("inflection point carries a convexity");
      const Vec2 chord = b - a;
      const SlopeSign s = slope_sign_of_direction(chord, 0.0);
      if ((f.slope_sign == SlopeSign::Positive || f.slope_sign == SlopeSign::Negative) && s != f.slope_sign)
        fail("slope sign disagrees with neighbouring samples");
      break;
    }
    case FeatureKind::Cusp:
      if (f.tip_direction && slope_sign_of_direction(*f.tip_direction) != f.slope_sign)
        fail("slope sign disagrees with tip direction");
      break;
    case FeatureKind::CrossingRef:
      break;
  }
}

}  // namespace

std::vector<Violation> validate(const Graphic& g) {
  std::vector<Violation> out;
  if (g.loops.empty()) add(out, Rule::V0, -1, -1, "graphic has no loops");
  std::vector<bool> sound(g.loops.size(), false);

  for (std::size_t l = 0; l < g.loops.size(); ++l) {
    const Loop& loop = g.loops[l];
    const int li = static_cast<int>(l);
    sound[l] = structurally_sound(loop, li, out);
    if (!sound[l]) continue;
    const std::size_t n = loop.size();

    // V1
    if (loop.cusp_count() % 2 != 0)
      add(out, Rule::V1, li, -1, "odd number of cusps (" + std::to_string(loop.cusp_count()) + ")");

    for (std::size_t i = 0; i < n; ++i) {
      const Feature& f = loop.features[i];
      const Arc& before = loop.arc_before(i);
      const Arc& after = loop.arc_after(i);
      // V2
      if (f.kind == FeatureKind::Cusp) {
        if (before.label == after.label)
          add(out, Rule::V2, li, static_cast<int>(i), "fold label does not change at a cusp");
        if (f.branch_labels && f.branch_labels->left_of_tip == f.branch_labels->right_of_tip)
          add(out, Rule::V2, li, static_cast<int>(i), "cusp branch labels must be one d and one i");
      } else if (before.label != after.label) {
        add(out, Rule::V2, li, static_cast<int>(i), "fold label changes away from a cusp");
      }
      // V3
      const bool gray = after.gray_side != Side::None;
      if (gray != (after.label == FoldLabel::Definite))
        add(out, Rule::V3, li, static_cast<int>(i), "gray side present iff definite is violated");
      if (f.kind != FeatureKind::Cusp && before.label == after.label &&
          before.gray_side != after.gray_side)
        add(out, Rule::V3, li, static_cast<int>(i), "gray side jumps along a smooth arc");
      // V5
      if (f.kind == FeatureKind::Cusp && f.tip_direction && f.branch_labels) {
        const Vec2 d = *f.tip_direction;
        int side_in = 0, side_out = 0;
        bool consistent = true;
        for (const Vec2& p : branch_before(loop, i, 5)) {
          const int s = side_of_tip_line(f.position, d, p, 0.0);
          if (side_in == 0) side_in = s;
          if (s == 0 || s != side_in) consistent = false;
        }
        for (const Vec2& p : branch_after(loop, i, 5)) {
          const int s = side_of_tip_line(f.position, d, p, 0.0);
          if (side_out == 0) side_out = s;
          if (s == 0 || s != side_out) consistent = false;
        }
        if (!consistent || side_in == side_out || side_in == 0) {
          add(out, Rule::V5, li, static_cast<int>(i), "cusp branches are not separated by the tip tangent line");
        } else {
          const FoldLabel left = side_in > 0 ? before.label : after.label;
          const FoldLabel right = side_in > 0 ? after.label : before.label;
          if (f.branch_labels->left_of_tip != left || f.branch_labels->right_of_tip != right)
            add(out, Rule::V5, li, static_cast<int>(i), "cusp branch labels disagree with branch geometry");
        }
      }
      // V6
      check_feature_geometry(loop, li, i, out);
    }
  }

  // V4
  for (std::size_t c = 0; c < g.crossings.size(); ++c) {
    const Crossing& x = g.crossings[c];
    if (!(x.angle > 0.0))
      add(out, Rule::V4, -1, static_cast<int>(c), "crossing is not transverse");
    for (std::size_t l = 0; l < g.loops.size(); ++l)
      for (const Feature& f : g.loops[l].features)
        if (f.kind == FeatureKind::Cusp && (f.position - x.position).norm() < kCrossingCuspClearance)
          add(out, Rule::V4, static_cast<int>(l), static_cast<int>(c), "crossing on a cusp");
  }
  return out;
}

// ---------------------------------------------------------------------------
// scan order and planar symmetries

std::vector<ScanEntry> features_by_scan(const Graphic& g, ScanDirection direction) {
  std::vector<ScanEntry> entries;
  for (std::size_t l = 0; l < g.loops.size(); ++l)
    for (std::size_t i = 0; i < g.loops[l].features.size(); ++i)
      entries.push_back({{static_cast<int>(l), static_cast<int>(i)}, g.loops[l].features[i].position});
  const bool up = direction == ScanDirection::Up;
  std::sort(entries.begin(), entries.end(), [up](const ScanEntry& a, const ScanEntry& b) {
    if (a.position.y() != b.position.y()) return up ? a.position.y() < b.position.y() : a.position.y() > b.position.y();
    if (a.position.x() != b.position.x()) return a.position.x() < b.position.x();
    return a.ref < b.ref;
  });
  // Heights within the image tolerance are one level: order such runs by f so roundoff
  // in g cannot swap them.
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i + 1;
    while (j < entries.size() &&
           std::abs(entries[j].position.y() - entries[j - 1].position.y()) <= kGraphicTolerance)
      ++j;
    std::sort(entries.begin() + static_cast<std::ptrdiff_t>(i), entries.begin() + static_cast<std::ptrdiff_t>(j),
              [](const ScanEntry& a, const ScanEntry& b) {
                if (a.position.x() != b.position.x()) return a.position.x() < b.position.x();
                return a.ref < b.ref;
              });
    i = j;
  }
  return entries;
}

namespace {

template <typename PointMap, typename FeatureMap, typename ArcMap>
Graphic transform(const Graphic& g, PointMap point, FeatureMap feature, ArcMap arc) {
  Graphic out = g;
  for (auto& loop : out.loops) {
    for (auto& f : loop.features) {
      f.position = point(f.position);
      feature(f);
    }
    for (auto& a : loop.arcs) {
      for (auto& p : a.points) p = point(p);
      arc(a);
    }
  }
  for (auto& c : out.crossings) c.position = point(c.position);
  return out;
}

Side opposite(Side s) {
  return s == Side::Left ? Side::Right : s == Side::Right ? Side::Left : Side::None;
}

}  // namespace

Graphic reflect(const Graphic& g) {
  return transform(
      g, [](const Vec2& p) { return Vec2(p.x(), -p.y()); },
      [](Feature& f) {
        if (f.convexity == Convexity::Up) f.convexity = Convexity::Down;
        else if (f.convexity == Convexity::Down) f.convexity = Convexity::Up;
        if (f.tip_direction) f.tip_direction = Vec2(f.tip_direction->x(), -f.tip_direction->y());
        if (f.branch_labels) std::swap(f.branch_labels->left_of_tip, f.branch_labels->right_of_tip);
        if (f.slope_sign == SlopeSign::Positive) f.slope_sign = SlopeSign::Negative;
        else if (f.slope_sign == SlopeSign::Negative) f.slope_sign = SlopeSign::Positive;
      },
      [](Arc& a) { a.gray_side = opposite(a.gray_side); });
}

Graphic rotate_half_turn(const Graphic& g) {
  return transform(
      g, [](const Vec2& p) { return Vec2(-p.x(), -p.y()); },
      [](Feature& f) {
        switch (f.convexity) {
          case Convexity::Up: f.convexity = Convexity::Down; break;
          case Convexity::Down: f.convexity = Convexity::Up; break;
          case Convexity::Left: f.convexity = Convexity::Right; break;
          case Convexity::Right: f.convexity = Convexity::Left; break;
          case Convexity::None: break;
        }
        if (f.tip_direction) f.tip_direction = Vec2(-*f.tip_direction);
      },
      [](Arc&) {});
}

}  // namespace rsg
