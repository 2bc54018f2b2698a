#include "synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rsg/classifier.hpp"
#include <Eigen/LU>

#include "rsg/error.hpp"

namespace rsg::testing {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kCuspNudge = 1e-6;
constexpr double kSeam = 0.1234567;

struct Jet {
  Vec2 p, d1, d2;
};

Jet base_curve(const ShapeSpec& s, double t) {
  const double c = std::cos(t), sn = std::sin(t);
  switch (s.shape) {
    case Shape::Ellipse:
      return {{c, sn}, {-sn, c}, {-c, -sn}};
    case Shape::Wobble: {
      const double r = 1.0 + s.a * std::cos(s.k * t);
      const double r1 = -s.a * s.k * std::sin(s.k * t);
      const double r2 = -s.a * s.k * s.k * std::cos(s.k * t);
      return {{r * c, r * sn},
              {r1 * c - r * sn, r1 * sn + r * c},
              {r2 * c - 2 * r1 * sn - r * c, r2 * sn + 2 * r1 * c - r * sn}};
    }
    case Shape::Lip: {
      const double h = s.a;
      return {{c, h * sn * sn * sn},
              {-sn, 3 * h * sn * sn * c},
              {-c, 3 * h * (2 * sn * c * c - sn * sn * sn)}};
    }
    case Shape::Astroid:
      return {{c * c * c, sn * sn * sn},
              {-3 * c * c * sn, 3 * sn * sn * c},
              {6 * c * sn * sn - 3 * c * c * c, 6 * sn * c * c - 3 * sn * sn * sn}};
  }
  return {};
}

Jet curve(const ShapeSpec& s, double t) {
  const Jet j = base_curve(s, t);
  return {s.A * j.p + s.b, s.A * j.d1, s.A * j.d2};
}

std::vector<double> cusp_parameters(Shape shape) {
  const double pi = std::numbers::pi;
  switch (shape) {
    case Shape::Lip: return {0.0, pi};
    case Shape::Astroid: return {0.0, pi / 2, pi, 3 * pi / 2};
    default: return {};
  }
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Roots of fn on [lo, hi] found as sign changes on a uniform grid, refined by bisection.
template <typename Fn>
std::vector<double> roots(Fn fn, double lo, double hi, int grid) {
  std::vector<double> out;
  double t0 = lo, f0 = fn(lo);
  for (int i = 1; i <= grid; ++i) {
    const double t1 = lo + (hi - lo) * i / grid;
    const double f1 = fn(t1);
    if ((f0 > 0) != (f1 > 0)) {
      double a = t0, b = t1, fa = f0;
      for (int it = 0; it < 80; ++it) {
        const double m = 0.5 * (a + b);
        const double fm = fn(m);
        if ((fm > 0) == (fa > 0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      out.push_back(0.5 * (a + b));
    }
    t0 = t1;
    f0 = f1;
  }
  return out;
}

struct Placed {
  double t = 0.0;
  Feature feature;
  bool definite = true;  // label of the run the feature lies in (cusps: run after)
  int run = 0;
};

bool near_axis(const Vec2& d, double rel) {
  const double n = d.norm();
  return std::abs(d.x()) < rel * n || std::abs(d.y()) < rel * n;
}

}  // namespace

bool build_loop(const ShapeSpec& spec, int samples_per_unit, Loop& out) {
  const std::vector<double> cusps = cusp_parameters(spec.shape);
  const double det = spec.A.determinant();
  if (std::abs(det) < 1e-3) return false;

  std::vector<std::pair<double, double>> runs;
  if (cusps.empty()) {
    // start off the axes so no feature sits on the seam
    runs.push_back({kSeam, kSeam + kTwoPi});
  } else {
    for (std::size_t i = 0; i < cusps.size(); ++i)
      runs.push_back({cusps[i] + kCuspNudge, (i + 1 < cusps.size() ? cusps[i + 1] : kTwoPi) - kCuspNudge});
  }
  auto run_definite = [&](int r) { return spec.first_definite == (r % 2 == 0); };

  std::vector<Placed> placed;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto [lo, hi] = runs[r];
    const bool d = run_definite(static_cast<int>(r));
    for (double t : roots([&](double s) { return curve(spec, s).d1.y(); }, lo, hi, 400)) {
      const Jet j = curve(spec, t);
      if (std::abs(j.d2.y()) < 1e-4) return false;
      Feature f;
      f.kind = FeatureKind::Horizontal;
      f.position = j.p;
      f.convexity = j.d2.y() > 0 ? Convexity::Down : Convexity::Up;
      f.slope_sign = SlopeSign::Zero;
      placed.push_back({t, f, d, static_cast<int>(r)});
    }
    for (double t : roots([&](double s) { return curve(spec, s).d1.x(); }, lo, hi, 400)) {
      const Jet j = curve(spec, t);
      if (std::abs(j.d2.x()) < 1e-4) return false;
      Feature f;
      f.kind = FeatureKind::Vertical;
      f.position = j.p;
      f.convexity = j.d2.x() > 0 ? Convexity::Left : Convexity::Right;
      f.slope_sign = SlopeSign::Infinite;
      placed.push_back({t, f, d, static_cast<int>(r)});
    }
    auto bend = [&](double s) {
      const Jet j = base_curve(spec, s);
      return det * cross(j.d1, j.d2);
    };
    for (double t : roots(bend, lo, hi, 400)) {
      const Jet j = curve(spec, t);
      if (near_axis(j.d1, 1e-2)) return false;
      Feature f;
      f.kind = FeatureKind::Inflection;
      f.position = j.p;
      f.convexity = Convexity::None;
      f.slope_sign = slope_sign_of_direction(j.d1);
      placed.push_back({t, f, d, static_cast<int>(r)});
    }
  }

  const double delta = 1e-3;
  for (std::size_t r = 0; r < cusps.size(); ++r) {
    const double t = cusps[r];
    const Vec2 p = curve(spec, t).p;
    const Vec2 before = curve(spec, t - delta).p;
    const Vec2 after = curve(spec, t + delta).p;
    const Vec2 tip = (p - 0.5 * (before + after)).normalized();
    if (near_axis(tip, 5e-2)) return false;
    const bool before_definite = run_definite(static_cast<int>((r + cusps.size() - 1) % cusps.size()));
    const bool after_definite = run_definite(static_cast<int>(r));
    const int side_in = side_of_tip_line(p, tip, before, 0.0);
    const int side_out = side_of_tip_line(p, tip, after, 0.0);
    if (side_in == 0 || side_in == side_out) return false;
    auto label = [](bool d) { return d ? FoldLabel::Definite : FoldLabel::Indefinite; };
    Feature f;
    f.kind = FeatureKind::Cusp;
    f.position = p;
    f.tip_direction = tip;
    f.slope_sign = slope_sign_of_direction(tip);
    f.branch_labels = side_in > 0 ? BranchLabels{label(before_definite), label(after_definite)}
                                  : BranchLabels{label(after_definite), label(before_definite)};
    placed.push_back({t, f, after_definite, static_cast<int>(r)});
  }

  std::sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) { return a.t < b.t; });
  if (placed.empty()) return false;
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const Placed& a = placed[i];
    const Placed& b = placed[(i + 1) % placed.size()];
    const double gap = i + 1 < placed.size() ? b.t - a.t : b.t + kTwoPi - a.t;
    if (gap < 1e-3 || (placed.size() > 1 && (a.feature.position - b.feature.position).norm() < 1e-4)) return false;
  }

  // Definite runs in order of appearance take the gray sides of the spec.
  std::vector<int> definite_slot(std::max<std::size_t>(runs.size(), 1), -1);
  int slots = 0;
  for (std::size_t r = 0; r < runs.size(); ++r)
    if (run_definite(static_cast<int>(r))) definite_slot[r] = slots++;
  if (static_cast<int>(spec.gray.size()) < slots) return false;

  out = Loop{};
  for (std::size_t i = 0; i < placed.size(); ++i) {
    const Placed& a = placed[i];
    const bool last = i + 1 == placed.size();
    const double t0 = a.t;
    const double t1 = last ? placed[0].t + kTwoPi : placed[i + 1].t;
    // A cusp's run is the one after it; other features keep the run they lie in.
    const int run = a.run;
    const bool d = a.feature.kind == FeatureKind::Cusp ? run_definite(run) : a.definite;

    Arc arc;
    arc.label = d ? FoldLabel::Definite : FoldLabel::Indefinite;
    arc.gray_side = d ? spec.gray[static_cast<std::size_t>(definite_slot[static_cast<std::size_t>(run)])] : Side::None;
    const Vec2 p0 = a.feature.position;
    const Vec2 p1 = (last ? placed[0] : placed[i + 1]).feature.position;
    double length = 0.0;
    Vec2 prev = p0;
    for (int k = 1; k <= 16; ++k) {
      const Vec2 q = curve(spec, t0 + (t1 - t0) * k / 16.0).p;
      length += (q - prev).norm();
      prev = q;
    }
    const int m = std::max(6, static_cast<int>(std::ceil(length * samples_per_unit)));
    arc.points.push_back(p0);
    for (int k = 1; k < m; ++k) arc.points.push_back(curve(spec, t0 + (t1 - t0) * k / m).p);
    arc.points.push_back(p1);
    out.features.push_back(a.feature);
    out.arcs.push_back(std::move(arc));
  }
  return true;
}

bool compute_crossings(Graphic& g) {
  g.crossings.clear();
  struct Seg {
    Vec2 a, b;
    ArcRef arc;
    int loop;
    int index;  // running index within the loop
  };
  std::vector<Seg> segs;
  std::vector<int> loop_sizes;
  for (std::size_t l = 0; l < g.loops.size(); ++l) {
    int idx = 0;
    for (std::size_t a = 0; a < g.loops[l].arcs.size(); ++a) {
      const auto& pts = g.loops[l].arcs[a].points;
      for (std::size_t k = 0; k + 1 < pts.size(); ++k)
        segs.push_back({pts[k], pts[k + 1], {static_cast<int>(l), static_cast<int>(a)}, static_cast<int>(l), idx++});
    }
    loop_sizes.push_back(idx);
  }
  auto bbox_disjoint = [](const Seg& s, const Seg& t) {
    return std::max(s.a.x(), s.b.x()) < std::min(t.a.x(), t.b.x()) ||
           std::max(t.a.x(), t.b.x()) < std::min(s.a.x(), s.b.x()) ||
           std::max(s.a.y(), s.b.y()) < std::min(t.a.y(), t.b.y()) ||
           std::max(t.a.y(), t.b.y()) < std::min(s.a.y(), s.b.y());
  };
  for (std::size_t i = 0; i < segs.size(); ++i)
    for (std::size_t j = i + 1; j < segs.size(); ++j) {
      const Seg& s = segs[i];
      const Seg& t = segs[j];
      if (s.loop == t.loop) {
        const int n = loop_sizes[static_cast<std::size_t>(s.loop)];
        const int gap = std::abs(s.index - t.index);
        if (gap <= 1 || gap == n - 1) continue;
      }
      if (bbox_disjoint(s, t)) continue;
      const Vec2 r = s.b - s.a, q = t.b - t.a;
      const double den = cross(r, q);
      if (std::abs(den) < 1e-14) continue;
      const double u = cross(t.a - s.a, q) / den;
      const double v = cross(t.a - s.a, r) / den;
      if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
      const double angle = std::acos(std::min(1.0, std::abs(r.normalized().dot(q.normalized()))));
      if (angle < 5e-2) return false;
      Crossing c;
      c.position = s.a + u * r;
      c.first = s.arc;
      c.second = t.arc;
      c.angle = angle;
      for (const Loop& loop : g.loops)
        for (const Feature& f : loop.features)
          if ((f.position - c.position).norm() < 1e-3) return false;
      g.crossings.push_back(c);
    }
  return true;
}

namespace {

Eigen::Matrix2d rotation(double a) {
  Eigen::Matrix2d r;
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

// Index counts of a single loop, per function, ignoring Euler and uniqueness.
bool loop_has_extremum(const Loop& loop) {
  Graphic g;
  g.loops.push_back(loop);
  for (std::size_t i = 0; i < loop.features.size(); ++i) {
    const Feature& f = loop.features[i];
    const FeatureRef ref{0, static_cast<int>(i)};
    try {
      if (is_horizontal_feature(f)) {
        const int idx = index_of_horizontal(g, ref);
        if (idx == 0 || idx == 3) return true;
      }
      if (is_vertical_feature(f)) {
        const int idx = index_of_vertical(g, ref);
        if (idx == 0 || idx == 3) return true;
      }
    } catch (const Error&) {
      return true;
    }
  }
  return false;
}

}  // namespace

Graphic random_valid_graphic(std::mt19937_64& rng, int max_inner, GeneratorStats* stats) {
  GeneratorStats local;
  GeneratorStats& st = stats ? *stats : local;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uni = [&](double a, double b) { return a + (b - a) * unit(rng); };
  const int spu = 12;

  for (;;) {
    ++st.attempts;
    Graphic g;
    bool ok = true;

    // Outer boundary: definite, shaded toward the inside.
    {
      ShapeSpec s;
      s.shape = unit(rng) < 0.5 ? Shape::Ellipse : Shape::Wobble;
      s.a = uni(0.03, 0.12);
      s.k = unit(rng) < 0.5 ? 2 : 3;
      const double flip = unit(rng) < 0.5 ? -1.0 : 1.0;
      s.A = rotation(uni(0, kTwoPi)) * Eigen::DiagonalMatrix<double, 2>(uni(2.8, 3.4), flip * uni(2.8, 3.4));
      s.first_definite = true;
      s.gray = {flip > 0 ? Side::Left : Side::Right};
      Loop loop;
      ok = build_loop(s, spu, loop);
      if (ok) g.loops.push_back(std::move(loop));
    }

    std::uniform_int_distribution<int> count(0, max_inner);
    const int inner = ok ? count(rng) : 0;
    for (int n = 0; ok && n < inner; ++n) {
      ShapeSpec s;
      const double pick = unit(rng);
      s.shape = pick < 0.2 ? Shape::Ellipse : pick < 0.35 ? Shape::Wobble : pick < 0.75 ? Shape::Lip : Shape::Astroid;
      s.a = s.shape == Shape::Lip ? uni(0.2, 0.8) : uni(0.05, 0.3);
      s.k = unit(rng) < 0.5 ? 2 : 3;
      const double flip = unit(rng) < 0.5 ? -1.0 : 1.0;
      s.A = rotation(uni(0, kTwoPi)) * Eigen::DiagonalMatrix<double, 2>(uni(0.3, 0.9), flip * uni(0.3, 0.9)) *
            rotation(uni(0, kTwoPi));
      const double rho = uni(0.0, 1.4), phi = uni(0, kTwoPi);
      s.b = Vec2(rho * std::cos(phi), rho * std::sin(phi));
      s.first_definite = unit(rng) < 0.5;

      // Among the gray assignments, keep those adding no extremum; pick one at random.
      const int runs = s.shape == Shape::Astroid ? 2 : 1;
      std::vector<std::vector<Side>> options;
      Loop candidate;
      for (int mask = 0; mask < (1 << runs); ++mask) {
        s.gray.clear();
        for (int r = 0; r < runs; ++r) s.gray.push_back((mask >> r) & 1 ? Side::Left : Side::Right);
        if (!build_loop(s, spu, candidate)) {
          ok = false;
          break;
        }
        if (!loop_has_extremum(candidate)) options.push_back(s.gray);
      }
      if (!ok || options.empty()) {
        ok = false;
        break;
      }
      s.gray = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
      build_loop(s, spu, candidate);
      g.loops.push_back(std::move(candidate));
    }
    if (!ok || !compute_crossings(g)) {
      ++st.rejected_geometry;
      continue;
    }
    const auto violations = validate(g);
    bool parity = false;
    for (const auto& v : violations) parity = parity || v.rule == Rule::V1 || v.rule == Rule::V2;
    if (parity) ++st.parity_or_alternation;
    if (!violations.empty()) {
      ++st.rejected_validation;
      continue;
    }
    try {
      graphic_profile(g, true);
    } catch (const Error&) {
      ++st.rejected_profile;
      continue;
    }
    return g;
  }
}

}  // namespace rsg::testing
