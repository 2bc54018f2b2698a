#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rsg/graphic.hpp"
#include "rsg/manifold.hpp"
#include "rsg/morse.hpp"
#include "rsg/parallel.hpp"

namespace rsg {

enum class FoldKind { Definite, Indefinite, Cusp };

inline constexpr double kCorrectorTolerance = 1e-10;
inline constexpr double kSeedSingularValue = 1e-2;
inline constexpr double kCuspArclengthTolerance = 1e-10;
inline constexpr double kKernelFormTolerance = 1e-7;
inline constexpr double kCrossingMinAngle = 1e-3;
inline constexpr double kTriplePointRadius = 1e-6;
inline constexpr double kFeatureSeparation = 1e-6;
inline constexpr int kCorrectorMaxFailures = 5;

/// The pair (F, G) on M, with the map phi = F x G.
struct SingularProblem {
  Expression f;
  Expression g;
  ImplicitThreeManifold manifold;
};

struct SingularSample {
  Vec4 position = Vec4::Zero();
  Vec2 image = Vec2::Zero();
  double arclength = 0.0;
  FoldKind fold_kind = FoldKind::Definite;
  Side gray_side = Side::None;
  Vec2 tangent_image = Vec2::Zero();  // d phi(t) for the unit curve tangent t
  Vec4 tangent = Vec4::Zero();        // unit tangent of the singular curve in R^4
};

struct CuspInfo {
  std::size_t sample = 0;
  Vec2 tip_direction = Vec2::Zero();  // unit, from the branches toward the tip point
  BranchLabels branch_labels;
  int before_side = 0;  // side of the tip line holding the incoming branch: +1 left, -1 right
};

struct TracedLoop {
  std::vector<SingularSample> samples;
  std::vector<CuspInfo> cusps;  // ordered by sample index
  bool closed = true;
  double length = 0.0;
};

/// Transverse double point of the image. Segments are (loop, sample index i) meaning the
/// image chord from sample i to sample i + 1 (cyclically on closed loops).
struct ImageCrossing {
  Vec2 position = Vec2::Zero();
  int loop_a = 0;
  std::size_t segment_a = 0;
  int loop_b = 0;
  std::size_t segment_b = 0;
  double angle = 0.0;
};

struct SingularCurveSet {
  std::shared_ptr<const SingularProblem> problem;
  double step = 1e-3;
  std::vector<TracedLoop> loops;
  std::vector<ImageCrossing> crossings;

  int cusp_count() const;
};

struct TraceParams {
  double step = 1e-3;
  SeedGrid seeds{};
};

// ---------------------------------------------------------------------------
// Pointwise numerics

/// Residual of the singular-set equations: C - level and the four 3x3 minors of
/// [grad C | grad F | grad G].
Eigen::Matrix<double, 5, 1> singular_residual(const SingularProblem& p, const Vec4& x);
Eigen::Matrix<double, 5, 4> singular_jacobian(const SingularProblem& p, const Vec4& x);

/// Smallest singular value of [grad C | grad F | grad G].
double rank_defect(const SingularProblem& p, const Vec4& x);

/// Gauss-Newton projection onto the singular set. With a hyperplane (normal, offset) the
/// solution is additionally constrained to normal . y = offset. Returns nullopt when the
/// residual does not reach 1e-10.
std::optional<Vec4> correct_to_singular_set(const SingularProblem& p, const Vec4& start,
                                            const Vec4* normal = nullptr, double offset = 0.0);

/// Unit null direction of the singular-set Jacobian, oriented to have positive dot
/// product with `orient` when given.
Vec4 singular_tangent(const SingularProblem& p, const Vec4& x, const Vec4* orient = nullptr);

/// d phi applied to a vector.
Vec2 image_of(const SingularProblem& p, const Vec4& x);
Vec2 image_tangent(const SingularProblem& p, const Vec4& x, const Vec4& t);

struct FoldClassification {
  FoldKind kind = FoldKind::Definite;
  Side gray_side = Side::None;
};

/// Definite/indefinite test from the constrained Hessian of aF + bG on ker d phi, and the
/// gray side from perturbations of size 10 * step along the kernel, relative to the curve
/// orientation given by `tangent_image`. Throws IndefiniteBoundary if a kernel-form
/// eigenvalue has magnitude below 1e-7.
FoldClassification classify_fold(const SingularProblem& p, const Vec4& position,
                                 const Vec2& tangent_image, double step);

// ---------------------------------------------------------------------------
// Curves

/// Traces from a point of the singular set until the curve returns to it (closed) or
/// max_length is reached (open). Samples carry positions, images and tangents only.
TracedLoop trace_curve(const SingularProblem& p, const Vec4& start, double step,
                       double max_length = 1000.0);

/// Finds image-tangent reversals, refines them by bisection and inserts cusp samples.
/// Tip directions are set; branch labels need fold classification and are filled by
/// label_loop. Throws TypeTwoDetected if the tip line does not separate the branches.
void detect_cusps(const SingularProblem& p, TracedLoop& loop, double step);

/// Fold kind and gray side of every non-cusp sample, and cusp branch labels.
void label_loop(const SingularProblem& p, TracedLoop& loop, double step);

/// Full pipeline on M: seeds, tracing, cusps, labels, crossings. Throws TraceStalled,
/// NotStable (singular set is not a curve), NoSingularSet.
SingularCurveSet trace_singular_set(const SingularProblem& p, const TraceParams& params = {},
                                    const LogSink& log = nullptr);

// ---------------------------------------------------------------------------
// Stability and graphic

struct StabilityIssue {
  std::string what;
  Vec2 where = Vec2::Zero();
};

struct StabilityReport {
  bool pass = true;
  std::vector<StabilityIssue> issues;
};

/// Image double points of all loops; overlapping collinear chords are reported with
/// angle 0.
std::vector<ImageCrossing> find_crossings(const SingularProblem& p, const std::vector<TracedLoop>& loops,
                                          double step);

StabilityReport verify_stability(const SingularCurveSet& curves);

/// Builds the graphic. Throws FeatureTooClose, NoSingularSet for an empty set.
Graphic extract_graphic(const SingularCurveSet& curves);

const char* to_string(FoldKind k);

}  // namespace rsg
