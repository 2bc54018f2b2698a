#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rsg/error.hpp"
#include "rsg/tracer.hpp"

using namespace rsg;

namespace {

SingularProblem circle_pair() { return {parse("x1"), parse("x2"), ImplicitThreeManifold::sphere()}; }

SingularProblem four_cusp_pair() {
  return {parse("x1"), parse("x2 + 1.5*x1*x3^2 + 0.1*x3"), ImplicitThreeManifold::sphere()};
}

// The hyperplane x4 = 0 with the standard cusp (x, y, z) -> (x, z^3 + x z + y^2).
// Singular curve (-3s^2, 0, s, 0), image (-3s^2, -2s^3).
SingularProblem cusp_model() {
  return {parse("x1"), parse("x3^3 + x1*x3 + x2^2"), ImplicitThreeManifold{parse("x4"), 0.0, "plane"}};
}

const SingularCurveSet& traced_four_cusps() {
  static const SingularCurveSet set = trace_singular_set(four_cusp_pair());
  return set;
}

double nearest_sample(const SingularCurveSet& s, const Vec4& x) {
  double best = 1e300;
  for (const auto& loop : s.loops)
    for (const auto& q : loop.samples) best = std::min(best, (q.position - x).norm());
  return best;
}

}  // namespace

TEST(Residual, VanishesOnCircle) {
  const SingularProblem p = circle_pair();
  const Vec4 x(std::cos(0.3), std::sin(0.3), 0, 0);
  EXPECT_NEAR(singular_residual(p, x).norm(), 0.0, 1e-15);
  EXPECT_NEAR(rank_defect(p, x), 0.0, 1e-15);
  EXPECT_GT(rank_defect(p, Vec4(0.5, 0.5, 0.5, 0.5)), 0.1);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  const SingularProblem p = four_cusp_pair();
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec4 x = Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
    const auto j = singular_jacobian(p, x);
    for (int k = 0; k < 4; ++k) {
      Vec4 a = x, b = x;
      a[k] += 1e-6;
      b[k] -= 1e-6;
      const auto fd = (singular_residual(p, a) - singular_residual(p, b)) / 2e-6;
      EXPECT_NEAR((j.col(k) - fd).norm(), 0.0, 1e-6);
    }
  }
}

TEST(Corrector, ConvergesAndRespectsHyperplane) {
  const SingularProblem p = four_cusp_pair();
  const SingularCurveSet& set = traced_four_cusps();
  const Vec4 x = set.loops[0].samples[100].position;
  const Vec4 t = set.loops[0].samples[100].tangent;
  const Vec4 start = x + 1e-3 * Vec4(0.3, -0.2, 0.5, 0.1);
  const auto free = correct_to_singular_set(p, start);
  ASSERT_TRUE(free);
  EXPECT_LE(singular_residual(p, *free).norm(), kCorrectorTolerance);
  const double offset = t.dot(x);
  const auto pinned = correct_to_singular_set(p, start, &t, offset);
  ASSERT_TRUE(pinned);
  EXPECT_LE(singular_residual(p, *pinned).norm(), kCorrectorTolerance);
  EXPECT_NEAR(t.dot(*pinned), offset, 1e-10);
  EXPECT_NEAR((*pinned - x).norm(), 0.0, 1e-7);
}

TEST(Tangent, SpansJacobianKernel) {
  const SingularProblem p = four_cusp_pair();
  for (const auto& s : traced_four_cusps().loops[1].samples) {
    const Vec4 t = singular_tangent(p, s.position);
    EXPECT_NEAR(t.norm(), 1.0, 1e-12);
    EXPECT_LE((singular_jacobian(p, s.position) * t).norm(), 1e-8);
  }
}

TEST(Trace, CircleImageIsUnitCircle) {
  const SingularCurveSet set = trace_singular_set(circle_pair());
  ASSERT_EQ(set.loops.size(), 1u);
  EXPECT_EQ(set.cusp_count(), 0);
  EXPECT_TRUE(set.loops[0].closed);
  EXPECT_NEAR(set.loops[0].length, 2 * M_PI, 1e-3);
  for (const auto& s : set.loops[0].samples) {
    EXPECT_NEAR(s.image.norm(), 1.0, 1e-9);
    EXPECT_EQ(s.fold_kind, FoldKind::Definite);
  }
  EXPECT_TRUE(verify_stability(set).pass);
}

// Oracle: brute-force the singular set from a dense grid of independent starts; every
// point found must lie on a traced loop.
TEST(Trace, NoMissedComponents) {
  const SingularProblem p = four_cusp_pair();
  const SingularCurveSet& set = traced_four_cusps();
  const auto grid = seed_points(p.manifold, 20000);
  int found = 0;
  for (const Vec4& x : grid) {
    if (rank_defect(p, x) > 5e-2) continue;
    const auto y = correct_to_singular_set(p, x);
    if (!y) continue;
    ++found;
    EXPECT_LT(nearest_sample(set, *y), 2 * set.step);
  }
  EXPECT_GT(found, 50);
}

TEST(Trace, DegeneratePairIsNotStable) {
  const SingularProblem p{parse("x1"), parse("x1"), ImplicitThreeManifold::sphere()};
  try {
    trace_singular_set(p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotStable);
  }
}

TEST(Trace, FourCuspExample) {
  const SingularCurveSet& set = traced_four_cusps();
  EXPECT_EQ(set.loops.size(), 3u);
  EXPECT_EQ(set.cusp_count(), 4);
  for (const auto& loop : set.loops) {
    EXPECT_TRUE(loop.closed);
    EXPECT_EQ(loop.cusps.size() % 2, 0u);
    for (const auto& s : loop.samples) EXPECT_LE(singular_residual(*set.problem, s.position).norm(), 1e-9);
  }
  EXPECT_TRUE(verify_stability(set).pass);
}

TEST(Trace, ParallelismDoesNotChangeOutput) {
  setenv("RSGRAPHIC_THREADS", "1", 1);
  const SingularCurveSet one = trace_singular_set(four_cusp_pair());
  setenv("RSGRAPHIC_THREADS", "5", 1);
  const SingularCurveSet five = trace_singular_set(four_cusp_pair());
  unsetenv("RSGRAPHIC_THREADS");
  ASSERT_EQ(one.loops.size(), five.loops.size());
  for (std::size_t l = 0; l < one.loops.size(); ++l) {
    ASSERT_EQ(one.loops[l].samples.size(), five.loops[l].samples.size());
    for (std::size_t i = 0; i < one.loops[l].samples.size(); ++i)
      EXPECT_EQ(one.loops[l].samples[i].position, five.loops[l].samples[i].position);
  }
}

TEST(CuspModel, OpenTraceThroughCusp) {
  const SingularProblem p = cusp_model();
  const double s0 = -0.3;
  const Vec4 start(-3 * s0 * s0, 0, s0, 0);
  ASSERT_LE(singular_residual(p, start).norm(), 1e-14);
  TracedLoop loop = trace_curve(p, start, 1e-3, 0.9);
  EXPECT_FALSE(loop.closed);
  for (const auto& s : loop.samples) {
    const double f = s.image.x(), g = s.image.y();
    EXPECT_NEAR(27 * g * g, -4 * f * f * f, 1e-9);
  }
  detect_cusps(p, loop, 1e-3);
  ASSERT_EQ(loop.cusps.size(), 1u);
  const CuspInfo& c = loop.cusps[0];
  EXPECT_NEAR(loop.samples[c.sample].image.norm(), 0.0, 1e-9);
  EXPECT_NEAR(c.tip_direction.x(), 1.0, 1e-6);
  EXPECT_NEAR(c.tip_direction.y(), 0.0, 1e-3);

  label_loop(p, loop, 1e-3);
  const auto& before = loop.samples[c.sample - 20];
  const auto& after = loop.samples[c.sample + 20];
  EXPECT_NE(before.fold_kind, after.fold_kind);
  EXPECT_NE(c.branch_labels.left_of_tip, c.branch_labels.right_of_tip);
  // the g < 0 branch is on the viewer's right when facing +f
  const auto& lower = before.image.y() < 0 ? before : after;
  const FoldLabel lower_label = lower.fold_kind == FoldKind::Definite ? FoldLabel::Definite : FoldLabel::Indefinite;
  EXPECT_EQ(c.branch_labels.right_of_tip, lower_label);
}

TEST(ClassifyFold, CircleIsDefiniteWithGrayInside) {
  const SingularProblem p = circle_pair();
  // At (1,0) traversed counterclockwise the disc lies on the left.
  const FoldClassification c = classify_fold(p, Vec4(1, 0, 0, 0), Vec2(0, 1), 1e-3);
  EXPECT_EQ(c.kind, FoldKind::Definite);
  EXPECT_EQ(c.gray_side, Side::Left);
  EXPECT_EQ(classify_fold(p, Vec4(1, 0, 0, 0), Vec2(0, -1), 1e-3).gray_side, Side::Right);
}

TEST(Crossings, TenCuspExample) {
  const SingularProblem p{parse("x1 + 0.60*x2*x4 + 0.75*x2*x3^2 + 0.43*x4^3 + 0.35*x3*x4"),
                          parse("x2 - 1.16*x1*x3^2 - 1.32*x1*x4^2 + 0.62*x3 - 0.51*x3^3 + 1.36*x2*x4^2 + "
                                "1.32*x2*x3^2 + 0.67*x1*x3*x4"),
                          ImplicitThreeManifold::sphere()};
  const SingularCurveSet set = trace_singular_set(p);
  EXPECT_EQ(set.cusp_count(), 10);
  ASSERT_EQ(set.crossings.size(), 3u);
  for (const auto& c : set.crossings) EXPECT_GT(c.angle, kCrossingMinAngle);
  EXPECT_EQ(find_crossings(p, set.loops, set.step).size(), 3u);
  EXPECT_TRUE(verify_stability(set).pass);
}

TEST(Extract, EmptySetThrows) {
  SingularCurveSet empty;
  try {
    extract_graphic(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoSingularSet);
  }
}
