#include "rsg/classifier.hpp"

#include <cmath>
#include <string>

#include "rsg/error.hpp"

namespace rsg {

int fold_extremum_index(FoldLabel label, bool convex_toward_min, bool gray_on_positive_side) {
  if (label == FoldLabel::Indefinite) return convex_toward_min ? 1 : 2;
  if (convex_toward_min) return gray_on_positive_side ? 0 : 2;
  return gray_on_positive_side ? 1 : 3;
}

int cusp_extremum_index(bool indefinite_on_positive_side) { return indefinite_on_positive_side ? 1 : 2; }

bool gray_above(Side gray, const Vec2& traversal) {
  const Vec2 left(-traversal.y(), traversal.x());
  return gray == Side::Left ? left.y() > 0 : left.y() < 0;
}

bool gray_right_of(Side gray, const Vec2& traversal) {
  const Vec2 left(-traversal.y(), traversal.x());
  return gray == Side::Left ? left.x() > 0 : left.x() < 0;
}

bool is_horizontal_feature(const Feature& f) {
  return f.kind == FeatureKind::Horizontal || (f.kind == FeatureKind::Cusp && f.slope_sign == SlopeSign::Zero);
}

bool is_vertical_feature(const Feature& f) {
  return f.kind == FeatureKind::Vertical || (f.kind == FeatureKind::Cusp && f.slope_sign == SlopeSign::Infinite);
}

namespace {

// Point of the branch whose distance from the tip along `axis` reaches `offset`, linearly
// interpolated between samples. Returns the last sample when the branch is shorter.
Vec2 probe_branch(const Vec2& tip, const std::vector<Vec2>& branch, int axis, double offset) {
  Vec2 prev = tip;
  for (const Vec2& p : branch) {
    const double dp = std::abs(p[axis] - tip[axis]);
    if (dp >= offset) {
      const double dq = std::abs(prev[axis] - tip[axis]);
      const double t = dp > dq ? (offset - dq) / (dp - dq) : 1.0;
      return prev + t * (p - prev);
    }
    prev = p;
  }
  return prev;
}

// Whether the indefinite branch of a horizontal (axis = 0) or vertical (axis = 1) cusp
// lies on the positive side (above in g, resp. right in f) of the definite branch.
bool indefinite_on_positive_side(const Loop& loop, std::size_t i, int axis) {
  const Feature& f = loop.features[i];
  const auto before = branch_before(loop, i, 64);
  const auto after = branch_after(loop, i, 64);
  const Vec2 pb = probe_branch(f.position, before, axis, kCuspBranchOffset);
  const Vec2 pa = probe_branch(f.position, after, axis, kCuspBranchOffset);
  const int other = 1 - axis;
  const bool before_is_indefinite = loop.arc_before(i).label == FoldLabel::Indefinite;
  const Vec2& indefinite = before_is_indefinite ? pb : pa;
  const Vec2& definite = before_is_indefinite ? pa : pb;
  return indefinite[other] > definite[other];
}

const Loop& loop_of(const Graphic& g, FeatureRef ref) { return g.loops.at(static_cast<std::size_t>(ref.loop)); }

}  // namespace

int index_of_horizontal(const Graphic& g, FeatureRef ref) {
  const Loop& loop = loop_of(g, ref);
  const std::size_t i = static_cast<std::size_t>(ref.feature);
  const Feature& f = loop.features.at(i);
  if (f.kind == FeatureKind::Inflection && f.slope_sign == SlopeSign::Zero)
    throw Error(ErrorKind::DegenerateCritical, "horizontal inflection point: G is not Morse");
  if (!is_horizontal_feature(f)) throw Error(ErrorKind::NotHorizontal, std::string("feature kind ") + to_string(f.kind));
  if (f.kind == FeatureKind::Cusp) return cusp_extremum_index(indefinite_on_positive_side(loop, i, 0));
  const Arc& arc = loop.arc_after(i);
  return fold_extremum_index(arc.label, f.convexity == Convexity::Down,
                             gray_above(arc.gray_side, traversal_direction(loop, i)));
}

int index_of_vertical(const Graphic& g, FeatureRef ref) {
  const Loop& loop = loop_of(g, ref);
  const std::size_t i = static_cast<std::size_t>(ref.feature);
  const Feature& f = loop.features.at(i);
  if (f.kind == FeatureKind::Inflection && f.slope_sign == SlopeSign::Infinite)
    throw Error(ErrorKind::DegenerateCritical, "vertical inflection point: F is not Morse");
  if (!is_vertical_feature(f)) throw Error(ErrorKind::NotVertical, std::string("feature kind ") + to_string(f.kind));
  if (f.kind == FeatureKind::Cusp) return cusp_extremum_index(indefinite_on_positive_side(loop, i, 1));
  const Arc& arc = loop.arc_after(i);
  return fold_extremum_index(arc.label, f.convexity == Convexity::Left,
                             gray_right_of(arc.gray_side, traversal_direction(loop, i)));
}

GraphicProfile graphic_profile(const Graphic& g, bool require_unique_extrema) {
  GraphicProfile out;
  std::array<int, 4> f_counts{}, g_counts{};
  for (const ScanEntry& e : features_by_scan(g, ScanDirection::Up)) {
    const Feature& f = feature_at(g, e.ref);
    if (f.kind == FeatureKind::Inflection) {
      if (f.slope_sign == SlopeSign::Zero) index_of_horizontal(g, e.ref);
      if (f.slope_sign == SlopeSign::Infinite) index_of_vertical(g, e.ref);
      continue;
    }
    if (is_horizontal_feature(f)) {
      const int idx = index_of_horizontal(g, e.ref);
      ++g_counts[idx];
      out.features.push_back({e.ref, f, MorseFunction::G, idx});
    } else if (is_vertical_feature(f)) {
      const int idx = index_of_vertical(g, e.ref);
      ++f_counts[idx];
      out.features.push_back({e.ref, f, MorseFunction::F, idx});
    }
  }
  out.f = profile_from_counts(f_counts);
  out.g = profile_from_counts(g_counts);
  if (require_unique_extrema && (!out.f.extrema_unique || !out.g.extrema_unique))
    throw Error(ErrorKind::ProfileInvalid, "minimum or maximum is not unique");
  return out;
}

}  // namespace rsg
