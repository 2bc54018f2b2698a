#pragma once

#include <vector>

#include "rsg/graphic.hpp"
#include "rsg/morse.hpp"

namespace rsg {

enum class MorseFunction { F, G };

/// Offset along the tangent at which a horizontal/vertical cusp compares its branches.
inline constexpr double kCuspBranchOffset = 1e-4;

struct IndexedFeature {
  FeatureRef ref;
  Feature feature;
  MorseFunction function = MorseFunction::G;
  int index = 0;
};

// Rule table for horizontal points (critical points of G):
//   definite:   down/gray above -> 0, down/gray below -> 2, up/gray above -> 1, up/gray below -> 3
//   indefinite: down -> 1, up -> 2
//   horizontal cusp: indefinite branch above the definite one -> 1, below -> 2
// Vertical points use the same table with down->left, up->right, above->right of (in f).
int fold_extremum_index(FoldLabel label, bool convex_toward_min, bool gray_on_positive_side);
int cusp_extremum_index(bool indefinite_on_positive_side);

/// Absolute side of the gray paint for a traversal-relative side: the left of a traversal
/// direction t is the half plane containing (-t.y, t.x).
bool gray_above(Side gray, const Vec2& traversal);
bool gray_right_of(Side gray, const Vec2& traversal);

bool is_horizontal_feature(const Feature& f);
bool is_vertical_feature(const Feature& f);

/// Throws NotHorizontal / NotVertical for features of the wrong kind and
/// DegenerateCritical for horizontal (vertical) inflections.
int index_of_horizontal(const Graphic& g, FeatureRef ref);
int index_of_vertical(const Graphic& g, FeatureRef ref);

struct GraphicProfile {
  MorseProfile f;
  MorseProfile g;
  std::vector<IndexedFeature> features;  // scan order of the graphic, F and G mixed
};

/// Indices of every horizontal (G) and vertical (F) feature and the resulting profiles.
/// Throws EulerViolation; with require_unique_extrema also ProfileInvalid when either
/// function has more than one minimum or maximum.
GraphicProfile graphic_profile(const Graphic& g, bool require_unique_extrema = true);

}  // namespace rsg
