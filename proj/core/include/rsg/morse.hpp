#pragma once

#include <array>
#include <span>
#include <vector>

#include "rsg/manifold.hpp"
#include "rsg/parallel.hpp"

namespace rsg {

inline constexpr double kNondegeneracyTolerance = 1e-7;
inline constexpr double kCriticalDedupRadius = 1e-6;
inline constexpr double kCriticalGradientTolerance = 1e-9;

struct CriticalPoint {
  Vec4 position;
  double value = 0.0;
  int index = 0;
  Vec3 hessian_eigenvalues;  // ascending
};

struct MorseProfile {
  std::array<int, 4> counts{};
  int genus = 0;
  bool extrema_unique = false;

  friend bool operator==(const MorseProfile&, const MorseProfile&) = default;
};

struct SeedGrid {
  int count = 4096;
};

/// Quasi-uniform points on M: a Halton sequence in Hopf coordinates of S^3, scaled by
/// sqrt(level) and retracted. Seeds whose retraction fails are dropped.
std::vector<Vec4> seed_points(const ImplicitThreeManifold& m, int count);

/// Critical points of f|M from Newton refinement of every seed, deduplicated within
/// 1e-6 and sorted lexicographically by position. Throws DegenerateCritical if a
/// constrained-Hessian eigenvalue has magnitude below 1e-7. Logs a SeedMiss warning when
/// the index counts violate Euler parity.
std::vector<CriticalPoint> find_critical_points(const Expression& f, const ImplicitThreeManifold& m,
                                                const SeedGrid& seeds = {},
                                                const LogSink& log = nullptr);

/// Newton refinement of a single point. Returns false when the iteration does not reach a
/// constrained-gradient norm of 1e-9.
bool refine_critical_point(const Expression& f, const ImplicitThreeManifold& m, Vec4& point);

/// Classifies an already refined critical point.
CriticalPoint classify_critical_point(const Expression& f, const ImplicitThreeManifold& m,
                                      const Vec4& position);

/// Throws EulerViolation or ProfileInvalid.
MorseProfile profile_from_counts(const std::array<int, 4>& counts);
MorseProfile profile(std::span<const CriticalPoint> points);

}  // namespace rsg
