#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "rsg/classifier.hpp"
#include "rsg/error.hpp"
#include "rsg/tracer.hpp"
#include "synthetic.hpp"

using namespace rsg;
using rsg::testing::Shape;
using rsg::testing::ShapeSpec;

namespace {

Graphic single(Shape shape, Side gray, double scale = 1.0) {
  ShapeSpec s;
  s.shape = shape;
  s.a = 0.5;
  s.A = scale * Eigen::Matrix2d::Identity();
  if (shape == Shape::Lip) {
    Eigen::Matrix2d r;
    r << std::cos(0.5), -std::sin(0.5), std::sin(0.5), std::cos(0.5);
    s.A = r;
  }
  s.gray = {gray, gray};
  Graphic g;
  g.loops.emplace_back();
  EXPECT_TRUE(rsg::testing::build_loop(s, 30, g.loops[0]));
  return g;
}

}  // namespace

TEST(Table, FoldIndices) {
  EXPECT_EQ(fold_extremum_index(FoldLabel::Definite, true, true), 0);
  EXPECT_EQ(fold_extremum_index(FoldLabel::Definite, true, false), 2);
  EXPECT_EQ(fold_extremum_index(FoldLabel::Definite, false, true), 1);
  EXPECT_EQ(fold_extremum_index(FoldLabel::Definite, false, false), 3);
  EXPECT_EQ(fold_extremum_index(FoldLabel::Indefinite, true, true), 1);
  EXPECT_EQ(fold_extremum_index(FoldLabel::Indefinite, false, false), 2);
  EXPECT_EQ(cusp_extremum_index(true), 1);
  EXPECT_EQ(cusp_extremum_index(false), 2);
}

TEST(Table, GraySides) {
  // moving right, the left side is above
  EXPECT_TRUE(gray_above(Side::Left, Vec2(1, 0)));
  EXPECT_FALSE(gray_above(Side::Right, Vec2(1, 0)));
  // moving up, the right side is to the right
  EXPECT_TRUE(gray_right_of(Side::Right, Vec2(0, 1)));
  EXPECT_FALSE(gray_right_of(Side::Left, Vec2(0, 1)));
}

TEST(Profile, DiscShadedInside) {
  const GraphicProfile p = graphic_profile(single(Shape::Ellipse, Side::Left));
  EXPECT_EQ(p.f.counts, (std::array<int, 4>{1, 0, 0, 1}));
  EXPECT_EQ(p.g.counts, (std::array<int, 4>{1, 0, 0, 1}));
  EXPECT_EQ(p.features.size(), 4u);
}

TEST(Profile, DiscShadedOutsideIsInvalid) {
  // gray outside: the top and bottom become index 1 and 2, no extrema at all
  const Graphic g = single(Shape::Ellipse, Side::Right);
  std::vector<int> indices;
  for (std::size_t i = 0; i < g.loops[0].features.size(); ++i)
    if (g.loops[0].features[i].kind == FeatureKind::Horizontal)
      indices.push_back(index_of_horizontal(g, {0, static_cast<int>(i)}));
  std::sort(indices.begin(), indices.end());
  EXPECT_EQ(indices, (std::vector<int>{1, 2}));
  EXPECT_THROW(graphic_profile(g), Error);
}

TEST(Profile, NestedDiscs) {
  Graphic g = single(Shape::Ellipse, Side::Left, 3.0);
  g.loops.push_back(single(Shape::Ellipse, Side::Right).loops[0]);
  const GraphicProfile p = graphic_profile(g);
  EXPECT_EQ(p.g.counts, (std::array<int, 4>{1, 1, 1, 1}));
  EXPECT_EQ(p.f.counts, (std::array<int, 4>{1, 1, 1, 1}));
  EXPECT_EQ(p.g.genus, 1);
}

TEST(Errors, WrongFeatureKind) {
  const Graphic g = single(Shape::Ellipse, Side::Left);
  for (std::size_t i = 0; i < 4; ++i) {
    const FeatureRef r{0, static_cast<int>(i)};
    if (g.loops[0].features[i].kind == FeatureKind::Vertical) {
      EXPECT_THROW(index_of_horizontal(g, r), Error);
    } else {
      try {
        index_of_vertical(g, r);
        FAIL();
      } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotVertical);
      }
    }
  }
}

TEST(Errors, HorizontalInflectionIsDegenerate) {
  Graphic g = single(Shape::Ellipse, Side::Left);
  Feature& f = g.loops[0].features[0];
  f.kind = FeatureKind::Inflection;
  f.convexity = Convexity::None;
  f.slope_sign = SlopeSign::Zero;
  EXPECT_FALSE(is_horizontal_feature(f));
  try {
    index_of_horizontal(g, {0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateCritical);
  }
}

TEST(Profile, FuzzAlwaysEulerConsistent) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    const GraphicProfile p = graphic_profile(rsg::testing::random_valid_graphic(rng, 4));
    for (const MorseProfile& m : {p.f, p.g}) {
      EXPECT_EQ(m.counts[0] - m.counts[1] + m.counts[2] - m.counts[3], 0);
      EXPECT_EQ(m.counts[0], 1);
      EXPECT_EQ(m.counts[3], 1);
    }
  }
}

// Oracle: indices read off the traced graphic equal Hessian indices of the matching
// critical points found independently on M.
TEST(Oracle, TracedIndicesMatchHessian) {
  const SingularProblem p{parse("x1"), parse("x2 + 1.5*x1*x3^2 + 0.1*x3"), ImplicitThreeManifold::sphere()};
  const Graphic g = extract_graphic(trace_singular_set(p));
  const GraphicProfile prof = graphic_profile(g, false);
  const auto crit_f = find_critical_points(p.f, p.manifold);
  const auto crit_g = find_critical_points(p.g, p.manifold);
  std::size_t matched_f = 0, matched_g = 0;
  for (const IndexedFeature& f : prof.features) {
    const auto& crit = f.function == MorseFunction::F ? crit_f : crit_g;
    int hits = 0;
    for (const CriticalPoint& c : crit) {
      const Vec2 image(eval(p.f, c.position), eval(p.g, c.position));
      if ((image - f.feature.position).norm() < 1e-6) {
        ++hits;
        EXPECT_EQ(c.index, f.index);
      }
    }
    EXPECT_EQ(hits, 1);
    (f.function == MorseFunction::F ? matched_f : matched_g) += hits;
  }
  EXPECT_EQ(matched_f, crit_f.size());
  EXPECT_EQ(matched_g, crit_g.size());
}
