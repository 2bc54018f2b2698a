#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rsg/graphic.hpp"

namespace rsg::testing {

// Synthetic graphics from closed planar curves under random affine maps. Every
// feature is placed by bisection on analytic derivatives.

enum class Shape { Ellipse, Wobble, Lip, Astroid };

struct ShapeSpec {
  Shape shape = Shape::Ellipse;
  double a = 0.0;   // lip height / wobble amplitude
  int k = 0;        // wobble frequency
  Eigen::Matrix2d A = Eigen::Matrix2d::Identity();
  Vec2 b = Vec2::Zero();
  bool first_definite = true;  // label of the arc run starting at t = 0+
  std::vector<Side> gray;      // one per definite run, traversal-relative
};

/// Builds a loop from a spec. Returns false when the curve is too close to degenerate for
/// clean feature placement (near-axis cusp tips or inflections, crowded features).
bool build_loop(const ShapeSpec& spec, int samples_per_unit, Loop& out);

/// Transverse crossings between arcs of distinct loops and non-adjacent arcs of one loop.
/// Returns false if a crossing is nearly tangent or sits close to a feature.
bool compute_crossings(Graphic& g);

struct GeneratorStats {
  int attempts = 0;
  int rejected_geometry = 0;
  int rejected_validation = 0;
  int rejected_profile = 0;
  int parity_or_alternation = 0;  // candidates with V1 or V2 violations
};

/// Random graphic with a definite outer boundary shaded inward and up to `max_inner`
/// further loops inside it. Retries until the result validates and both profiles have
/// unique extrema.
Graphic random_valid_graphic(std::mt19937_64& rng, int max_inner, GeneratorStats* stats = nullptr);

}  // namespace rsg::testing
