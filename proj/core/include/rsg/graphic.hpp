#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rsg {

using Vec2 = Eigen::Vector2d;

enum class FoldLabel { Definite, Indefinite };
enum class Side { Left, Right, None };
enum class FeatureKind { Horizontal, Vertical, Cusp, Inflection, CrossingRef };
enum class Convexity { Up, Down, Left, Right, None };
enum class SlopeSign { Positive, Negative, Zero, Infinite };

/// Absolute tolerance for geometric comparisons on image coordinates.
inline constexpr double kGraphicTolerance = 1e-9;
/// A crossing closer than this to a cusp image violates normal crossings.
inline constexpr double kCrossingCuspClearance = 1e-6;

/// Branch naming at a cusp: facing along the tip direction, left_of_tip is the branch on
/// the viewer's left and right_of_tip the one on the viewer's right.
struct BranchLabels {
  FoldLabel left_of_tip = FoldLabel::Definite;
  FoldLabel right_of_tip = FoldLabel::Indefinite;

  friend bool operator==(const BranchLabels&, const BranchLabels&) = default;
};

struct Feature {
  FeatureKind kind = FeatureKind::Horizontal;
  Vec2 position = Vec2::Zero();
  Convexity convexity = Convexity::None;
  std::optional<Vec2> tip_direction;         // cusps only, unit length
  std::optional<BranchLabels> branch_labels; // cusps only
  SlopeSign slope_sign = SlopeSign::Zero;
};

/// Image arc between two consecutive features of a loop. gray_side is relative to the
/// traversal direction of the loop and is None exactly for indefinite arcs.
struct Arc {
  FoldLabel label = FoldLabel::Definite;
  Side gray_side = Side::None;
  std::vector<Vec2> points;  // from the starting feature to the next feature, inclusive
};

/// Cyclic sequence: arcs[i] runs from features[i] to features[(i + 1) % n].
struct Loop {
  std::vector<Feature> features;
  std::vector<Arc> arcs;

  std::size_t size() const { return features.size(); }
  const Arc& arc_before(std::size_t feature) const {
    return arcs[(feature + arcs.size() - 1) % arcs.size()];
  }
  const Arc& arc_after(std::size_t feature) const { return arcs[feature]; }
  int cusp_count() const;
};

struct ArcRef {
  int loop = 0;
  int arc = 0;

  friend bool operator==(const ArcRef&, const ArcRef&) = default;
};

struct Crossing {
  Vec2 position = Vec2::Zero();
  ArcRef first;
  ArcRef second;
  double angle = 0.0;  // radians in (0, pi/2]
};

struct BoundingBox {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

struct Graphic {
  std::vector<Loop> loops;
  std::vector<Crossing> crossings;

  BoundingBox bounding_box() const;
  int cusp_count() const;
};

struct FeatureRef {
  int loop = 0;
  int feature = 0;

  friend bool operator==(const FeatureRef&, const FeatureRef&) = default;
  friend auto operator<=>(const FeatureRef&, const FeatureRef&) = default;
};

enum class Rule { V0, V1, V2, V3, V4, V5, V6 };

/// V0 is structural (sizes, arc endpoints, unit tip directions); V1..V6 are the graphic
/// rules: even cusp parity, d/i alternation exactly at cusps, gray flags iff definite,
/// crossings clear of cusps, type-one cusps, feature geometry matching the polylines.
struct Violation {
  Rule rule = Rule::V0;
  int loop = -1;
  int item = -1;  // feature or crossing index, -1 if not applicable
  std::string message;
};

std::vector<Violation> validate(const Graphic& g);

enum class ScanDirection { Up, Down };

struct ScanEntry {
  FeatureRef ref;
  Vec2 position;
};

/// Features ordered by g (ascending for Up, descending for Down). Heights closer than
/// kGraphicTolerance are ties, ordered by ascending f, then loop, then feature index.
std::vector<ScanEntry> features_by_scan(const Graphic& g, ScanDirection direction);

const Feature& feature_at(const Graphic& g, FeatureRef ref);

/// (f, g) -> (f, -g). Orientation reversing: gray sides and cusp branch names swap.
Graphic reflect(const Graphic& g);

/// (f, g) -> (-f, -g). Orientation preserving.
Graphic rotate_half_turn(const Graphic& g);

SlopeSign slope_sign_of_direction(const Vec2& d, double tolerance = kGraphicTolerance);

/// Unit traversal direction of the loop at a feature, estimated from the adjacent
/// polyline samples.
Vec2 traversal_direction(const Loop& loop, std::size_t feature);

/// Points of the arc before a cusp read backwards from the cusp (the incoming branch) and
/// of the arc after it (the outgoing branch), excluding the cusp point itself.
std::vector<Vec2> branch_before(const Loop& loop, std::size_t feature, std::size_t count);
std::vector<Vec2> branch_after(const Loop& loop, std::size_t feature, std::size_t count);

/// Side of the tip tangent line a point lies on: +1 viewer's left, -1 right, 0 on the line.
int side_of_tip_line(const Vec2& tip, const Vec2& direction, const Vec2& p, double tolerance);

const char* to_string(FoldLabel v);
const char* to_string(Side v);
const char* to_string(FeatureKind v);
const char* to_string(Convexity v);
const char* to_string(SlopeSign v);
const char* to_string(Rule v);

}  // namespace rsg
