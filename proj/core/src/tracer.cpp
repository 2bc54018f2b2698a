#include "rsg/tracer.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "rsg/error.hpp"
#include "rsg/graphic_io.hpp"

namespace rsg {

const char* to_string(FoldKind k) {
  switch (k) {
    case FoldKind::Definite: return "definite";
    case FoldKind::Indefinite: return "indefinite";
    case FoldKind::Cusp: return "cusp";
  }
  return "?";
}

int SingularCurveSet::cusp_count() const {
  int n = 0;
  for (const auto& l : loops) n += static_cast<int>(l.cusps.size());
  return n;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat54 = Eigen::Matrix<double, 5, 4>;

struct PointJets {
  Jet2 c, f, g;
};

PointJets jets(const SingularProblem& p, const Vec4& x) {
  return {eval_jet2(p.manifold.constraint, x), eval_jet2(p.f, x), eval_jet2(p.g, x)};
}

Mat43 gradient_matrix(const PointJets& j) {
  Mat43 a;
  a.col(0) = j.c.grad;
  a.col(1) = j.f.grad;
  a.col(2) = j.g.grad;
  return a;
}

Mat3 drop_row(const Mat43& a, int row) {
  Mat3 m;
  int r = 0;
  for (int i = 0; i < 4; ++i)
    if (i != row) m.row(r++) = a.row(i);
  return m;
}

Vec5 residual_from(const SingularProblem& p, const PointJets& j) {
  const Mat43 a = gradient_matrix(j);
  Vec5 r;
  r[0] = j.c.value - p.manifold.level;
  for (int i = 0; i < 4; ++i) r[i + 1] = drop_row(a, i).determinant();
  return r;
}

Mat54 jacobian_from(const PointJets& j) {
  const Mat43 a = gradient_matrix(j);
  const Mat4 h[3] = {j.c.hessian(), j.f.hessian(), j.g.hessian()};
  Mat54 jac;
  jac.row(0) = j.c.grad.transpose();
  for (int i = 0; i < 4; ++i) {
    const Mat3 base = drop_row(a, i);
    for (int k = 0; k < 4; ++k) {
      double d = 0.0;
      for (int col = 0; col < 3; ++col) {
        Mat3 m = base;
        int r = 0;
        for (int row = 0; row < 4; ++row)
          if (row != i) m(r++, col) = h[col](row, k);
        d += m.determinant();
      }
      jac(i + 1, k) = d;
    }
  }
  return jac;
}

Vec2 cross_normal(const Vec2& t) { return Vec2(-t.y(), t.x()); }

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

Eigen::Matrix<double, 5, 1> singular_residual(const SingularProblem& p, const Vec4& x) {
  return residual_from(p, jets(p, x));
}

Eigen::Matrix<double, 5, 4> singular_jacobian(const SingularProblem& p, const Vec4& x) {
  return jacobian_from(jets(p, x));
}

double rank_defect(const SingularProblem& p, const Vec4& x) {
  const Mat43 a = gradient_matrix(jets(p, x));
  const Eigen::JacobiSVD<Mat43> svd(a);
  const Vec3 sv = svd.singularValues();
  return sv.minCoeff();
}

std::optional<Vec4> correct_to_singular_set(const SingularProblem& p, const Vec4& start, const Vec4* normal,
                                            double offset) {
  Vec4 x = start;
  try {
    for (int it = 0; it < 30; ++it) {
      const PointJets j = jets(p, x);
      const Vec5 r = residual_from(p, j);
      const Mat54 jac = jacobian_from(j);
      double plane = 0.0;
      if (normal) plane = normal->dot(x) - offset;
      const double norm = std::sqrt(r.squaredNorm() + plane * plane);
      if (!std::isfinite(norm)) return std::nullopt;
      Vec4 delta;
      if (normal) {
        Eigen::Matrix<double, 6, 4> a;
        a.topRows<5>() = jac;
        a.row(5) = normal->transpose();
        Eigen::Matrix<double, 6, 1> b;
        b.head<5>() = -r;
        b[5] = -plane;
        Eigen::JacobiSVD<Eigen::Matrix<double, 6, 4>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        svd.setThreshold(1e-12);
        delta = svd.solve(b);
      } else {
        // rank-3 truncated pseudo-inverse: the singular set is a curve, so the fourth
        // direction is (near) null and must not be inverted
        Eigen::JacobiSVD<Mat54> svd(jac, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& s = svd.singularValues();
        delta.setZero();
        for (int k = 0; k < 3; ++k) {
          if (s[k] <= 1e-14 * s[0]) break;
          delta -= (svd.matrixU().col(k).dot(r) / s[k]) * svd.matrixV().col(k);
        }
      }
      const double dn = delta.norm();
      if (dn > 0.5) delta *= 0.5 / dn;
      x += delta;
      if (!x.allFinite() || x.norm() > 1e6) return std::nullopt;
      // one polishing step past the tolerance: Newton converges quadratically here
      if (norm <= kCorrectorTolerance) return x;
    }
    const PointJets j = jets(p, x);
    const double plane = normal ? normal->dot(x) - offset : 0.0;
    if (std::sqrt(residual_from(p, j).squaredNorm() + plane * plane) <= kCorrectorTolerance) return x;
  } catch (const Error&) {
    return std::nullopt;
  }
  return std::nullopt;
}

Vec4 singular_tangent(const SingularProblem& p, const Vec4& x, const Vec4* orient) {
  const Mat54 jac = singular_jacobian(p, x);
  Eigen::JacobiSVD<Mat54> svd(jac, Eigen::ComputeFullV);
  Vec4 t = svd.matrixV().col(3).normalized();
  if (orient && t.dot(*orient) < 0.0) t = -t;
  return t;
}

Vec2 image_of(const SingularProblem& p, const Vec4& x) { return Vec2(eval(p.f, x), eval(p.g, x)); }

Vec2 image_tangent(const SingularProblem& p, const Vec4& x, const Vec4& t) {
  return Vec2(eval_jet2(p.f, x).grad.dot(t), eval_jet2(p.g, x).grad.dot(t));
}

FoldClassification classify_fold(const SingularProblem& p, const Vec4& position, const Vec2& tangent_image,
                                 double step) {
  const PointJets j = jets(p, position);
  const ConstrainedJet cf = constrained_jet(j.f, j.c);
  const ConstrainedJet cg = constrained_jet(j.g, j.c);
  const Vec4& pf = cf.projected_gradient;
  const Vec4& pg = cg.projected_gradient;

  Eigen::Matrix2d gram;
  gram << pf.dot(pf), pf.dot(pg), pf.dot(pg), pg.dot(pg);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ge(gram);
  const Eigen::Vector2d ab = ge.eigenvectors().col(0);

  const Vec4 w = (pf.norm() >= pg.norm() ? pf : pg).normalized();
  const Mat43 basis = householder_complement(j.c.grad).basis;
  const Eigen::Matrix<double, 1, 3> wt = (basis.transpose() * w).transpose();
  const Eigen::JacobiSVD<Eigen::Matrix<double, 1, 3>> ws(wt, Eigen::ComputeFullV);
  Eigen::Matrix<double, 4, 2> kernel = basis * ws.matrixV().rightCols<2>();

  const Jet2 h = Jet2::constant(ab[0]) * j.f + Jet2::constant(ab[1]) * j.g;
  const ConstrainedJet ch = constrained_jet(h, j.c);
  Eigen::Matrix2d k = kernel.transpose() * ch.lagrangian_hessian * kernel;
  k = 0.5 * (k + k.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> ke(k);
  const Eigen::Vector2d ev = ke.eigenvalues();
  if (std::abs(ev[0]) < kKernelFormTolerance || std::abs(ev[1]) < kKernelFormTolerance)
    throw Error(ErrorKind::IndefiniteBoundary, "kernel form nearly degenerate (sample close to a cusp)");

  FoldClassification out;
  if (ev[0] * ev[1] < 0.0) {
    out.kind = FoldKind::Indefinite;
    return out;
  }
  out.kind = FoldKind::Definite;
  const Vec2 left = cross_normal(tangent_image).normalized();
  const Vec2 base = Vec2(j.f.value, j.g.value);
  const double eps = 10.0 * step;
  double side = 0.0;
  for (int e = 0; e < 2; ++e) {
    const Vec4 v = kernel * ke.eigenvectors().col(e);
    for (double sgn : {1.0, -1.0}) {
      const Vec4 q = retract(p.manifold, position + sgn * eps * v);
      side += (image_of(p, q) - base).dot(left);
    }
  }
  if (std::abs(side) < 1e-15) side = ev[0] * Vec2(ab[0], ab[1]).dot(left);
  out.gray_side = side > 0.0 ? Side::Left : Side::Right;
  return out;
}

namespace {

SingularSample make_sample(const SingularProblem& p, const Vec4& x, const Vec4& t) {
  SingularSample s;
  s.position = x;
  s.tangent = t;
  s.image = image_of(p, x);
  s.tangent_image = image_tangent(p, x, t);
  return s;
}

// Point of the singular set on the hyperplane t . y = t . base + sigma.
std::optional<Vec4> curve_point(const SingularProblem& p, const Vec4& base, const Vec4& t, double sigma) {
  return correct_to_singular_set(p, base + sigma * t, &t, t.dot(base) + sigma);
}

Vec4 curve_point_or_throw(const SingularProblem& p, const Vec4& base, const Vec4& t, double sigma) {
  auto y = curve_point(p, base, t, sigma);
  if (!y) throw Error(ErrorKind::TraceStalled, "corrector failed during refinement");
  return *y;
}

void recompute_arclength(TracedLoop& loop) {
  double s = 0.0;
  for (std::size_t i = 0; i < loop.samples.size(); ++i) {
    if (i > 0) s += (loop.samples[i].position - loop.samples[i - 1].position).norm();
    loop.samples[i].arclength = s;
  }
  loop.length = s;
  if (loop.closed && loop.samples.size() > 1)
    loop.length += (loop.samples.front().position - loop.samples.back().position).norm();
}

std::size_t segment_count(const TracedLoop& loop) {
  const std::size_t n = loop.samples.size();
  return loop.closed ? n : (n > 0 ? n - 1 : 0);
}

}  // namespace

TracedLoop trace_curve(const SingularProblem& p, const Vec4& start, double step, double max_length) {
  if (!(step >= 1e-4 && step <= 1e-1)) throw Error(ErrorKind::InvalidArgument, "step must lie in [1e-4, 1e-1]");
  auto x0 = correct_to_singular_set(p, start);
  if (!x0) throw Error(ErrorKind::TraceStalled, "start point does not converge to the singular set");
  TracedLoop loop;
  loop.closed = false;
  const Vec4 t0 = singular_tangent(p, *x0);
  loop.samples.push_back(make_sample(p, *x0, t0));

  double h = step;
  double length = 0.0;
  int failures = 0;
  while (true) {
    const Vec4 x = loop.samples.back().position;
    const Vec4 t = loop.samples.back().tangent;
    if (length > 5.0 * step) {
      const Vec4 d = *x0 - x;
      if (d.norm() < 1.5 * step && d.dot(t) > 0.0) {
        loop.closed = true;
        break;
      }
    }
    if (length > max_length) break;
    const auto y = curve_point(p, x, t, h);
    bool ok = y.has_value() && (*y - x).norm() < 2.0 * h;
    Vec4 ty;
    if (ok) {
      ty = singular_tangent(p, *y, &t);
      ok = ty.dot(t) > 0.95;
    }
    if (!ok) {
      h *= 0.5;
      if (++failures >= kCorrectorMaxFailures)
        throw Error(ErrorKind::TraceStalled, "corrector failed on " + std::to_string(failures) + " consecutive steps");
      continue;
    }
    failures = 0;
    length += (*y - x).norm();
    loop.samples.push_back(make_sample(p, *y, ty));
    h = std::min(step, 2.0 * h);
  }
  if (loop.closed && loop.samples.size() > 4 &&
      (loop.samples.back().position - *x0).norm() < 0.3 * step)
    loop.samples.pop_back();
  recompute_arclength(loop);
  return loop;
}

void detect_cusps(const SingularProblem& p, TracedLoop& loop, double step) {
  const std::size_t n = loop.samples.size();
  const std::size_t segments = segment_count(loop);
  std::vector<SingularSample> out;
  std::vector<CuspInfo> cusps;
  std::vector<bool> drop(n, false);
  std::vector<std::pair<std::size_t, SingularSample>> inserted;  // after sample i
  std::vector<CuspInfo> info;

  for (std::size_t i = 0; i < segments; ++i) {
    const SingularSample& a = loop.samples[i];
    const SingularSample& b = loop.samples[(i + 1) % n];
    if (a.fold_kind == FoldKind::Cusp || b.fold_kind == FoldKind::Cusp) continue;
    if (a.tangent_image.dot(b.tangent_image) >= 0.0) continue;

    const Vec4& base = a.position;
    const Vec4& t = a.tangent;
    const Vec2 ref = a.tangent_image;
    auto probe = [&](double sigma) {
      const Vec4 y = curve_point_or_throw(p, base, t, sigma);
      return image_tangent(p, y, singular_tangent(p, y, &t)).dot(ref);
    };
    double lo = 0.0, hi = t.dot(b.position - base);
    if (!(hi > 0.0)) throw Error(ErrorKind::TraceStalled, "cusp bracket is not forward along the curve");
    while (hi - lo > kCuspArclengthTolerance) {
      const double mid = 0.5 * (lo + hi);
      if (probe(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    const double root = 0.5 * (lo + hi);
    const Vec4 y = curve_point_or_throw(p, base, t, root);
    const Vec4 ty = singular_tangent(p, y, &t);
    SingularSample cusp = make_sample(p, y, ty);
    cusp.fold_kind = FoldKind::Cusp;
    cusp.gray_side = Side::None;

    const double delta = 1e-5;
    const Vec4 ym = curve_point_or_throw(p, y, ty, -delta);
    const Vec4 yp = curve_point_or_throw(p, y, ty, delta);
    const Vec2 tm = image_tangent(p, ym, singular_tangent(p, ym, &ty));
    const Vec2 tp = image_tangent(p, yp, singular_tangent(p, yp, &ty));
    CuspInfo c;
    c.tip_direction = (tm - tp).normalized();

    int side_before = 0, side_after = 0;
    bool consistent = true;
    for (int k = 1; k <= 5; ++k) {
      const double u = 2e-4 * k;
      const int sb = side_of_tip_line(cusp.image, c.tip_direction, image_of(p, curve_point_or_throw(p, y, ty, -u)), 0.0);
      const int sa = side_of_tip_line(cusp.image, c.tip_direction, image_of(p, curve_point_or_throw(p, y, ty, u)), 0.0);
      if (k == 1) {
        side_before = sb;
        side_after = sa;
      }
      if (sb == 0 || sa == 0 || sb != side_before || sa != side_after) consistent = false;
    }
    if (!consistent || side_before == side_after)
      throw Error(ErrorKind::TypeTwoDetected, "tip tangent line does not separate the cusp branches");
    c.before_side = side_before;

    if (root < 0.3 * step && i != 0) drop[i] = true;
    if (hi - root < 0.3 * step && (i + 1) % n != 0) drop[(i + 1) % n] = true;
    inserted.emplace_back(i, cusp);
    info.push_back(c);
  }
  if (inserted.empty()) return;

  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!drop[i]) out.push_back(loop.samples[i]);
    while (next < inserted.size() && inserted[next].first == i) {
      info[next].sample = out.size();
      out.push_back(inserted[next].second);
      cusps.push_back(info[next]);
      ++next;
    }
  }
  loop.samples = std::move(out);
  loop.cusps = std::move(cusps);
  recompute_arclength(loop);
}

void label_loop(const SingularProblem& p, TracedLoop& loop, double step) {
  const std::size_t n = loop.samples.size();
  std::vector<std::optional<FoldClassification>> cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    SingularSample& s = loop.samples[i];
    if (s.fold_kind == FoldKind::Cusp) continue;
    try {
      cls[i] = classify_fold(p, s.position, s.tangent_image, step);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IndefiniteBoundary) throw;
    }
  }

  // runs of fold samples between cusps; a closed loop without cusps is a single run
  std::vector<std::vector<std::size_t>> runs;
  if (loop.cusps.empty()) {
    runs.emplace_back();
    for (std::size_t i = 0; i < n; ++i) runs.back().push_back(i);
  } else {
    const std::size_t k = loop.cusps.size();
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t from = loop.cusps[c].sample;
      const std::size_t to = c + 1 < k ? loop.cusps[c + 1].sample : (loop.closed ? loop.cusps[0].sample + n : n);
      runs.emplace_back();
      for (std::size_t i = from + 1; i < to; ++i) runs.back().push_back(i % n);
    }
    if (!loop.closed) {
      runs.emplace_back();
      for (std::size_t i = 0; i < loop.cusps[0].sample; ++i) runs.back().push_back(i);
    }
  }

  for (const auto& run : runs) {
    std::optional<FoldClassification> ref;
    for (std::size_t i : run) {
      if (!cls[i]) continue;
      if (!ref) {
        ref = cls[i];
      } else if (cls[i]->kind != ref->kind || cls[i]->gray_side != ref->gray_side) {
        throw Error(ErrorKind::NotStable, "fold type changes away from a cusp near image point (" +
                                              std::to_string(loop.samples[i].image.x()) + ", " +
                                              std::to_string(loop.samples[i].image.y()) + ")");
      }
    }
    if (!ref && !run.empty())
      throw Error(ErrorKind::IndefiniteBoundary, "no classifiable sample between two cusps");
    for (std::size_t i : run) {
      loop.samples[i].fold_kind = ref->kind;
      loop.samples[i].gray_side = ref->gray_side;
    }
  }

  for (CuspInfo& c : loop.cusps) {
    const std::size_t s = c.sample;
    if (s == 0 || s + 1 >= n) {
      if (!loop.closed) throw Error(ErrorKind::TraceStalled, "cusp at the end of an open trace");
    }
    const FoldKind before = loop.samples[(s + n - 1) % n].fold_kind;
    const FoldKind after = loop.samples[(s + 1) % n].fold_kind;
    if (before == after || before == FoldKind::Cusp || after == FoldKind::Cusp)
      throw Error(ErrorKind::NotStable, "fold label does not change across a cusp");
    const FoldLabel lb = before == FoldKind::Definite ? FoldLabel::Definite : FoldLabel::Indefinite;
    const FoldLabel la = after == FoldKind::Definite ? FoldLabel::Definite : FoldLabel::Indefinite;
    c.branch_labels.left_of_tip = c.before_side > 0 ? lb : la;
    c.branch_labels.right_of_tip = c.before_side > 0 ? la : lb;
  }
}

// ---------------------------------------------------------------------------
// crossings

namespace {

struct Segment {
  int loop;
  std::size_t index;
  Vec2 a, b;
};

bool adjacent(const Segment& s, const Segment& t, const std::vector<TracedLoop>& loops) {
  if (s.loop != t.loop) return false;
  const std::size_t n = loops[static_cast<std::size_t>(s.loop)].samples.size();
  const std::size_t d = s.index > t.index ? s.index - t.index : t.index - s.index;
  return d <= 1 || (loops[static_cast<std::size_t>(s.loop)].closed && d == n - 1);
}

// Newton refinement of a double point on the true curves near the chord intersection.
Vec2 refine_crossing(const SingularProblem& p, const TracedLoop& la, std::size_t ia, double ua, const TracedLoop& lb,
                     std::size_t ib, double ub, double& angle) {
  const SingularSample& sa = la.samples[ia];
  const SingularSample& sb = lb.samples[ib];
  const SingularSample& ea = la.samples[(ia + 1) % la.samples.size()];
  const SingularSample& eb = lb.samples[(ib + 1) % lb.samples.size()];
  double xa = ua * sa.tangent.dot(ea.position - sa.position);
  double xb = ub * sb.tangent.dot(eb.position - sb.position);
  Vec2 pa, pb, ta, tb;
  for (int it = 0; it < 20; ++it) {
    const Vec4 ya = curve_point_or_throw(p, sa.position, sa.tangent, xa);
    const Vec4 yb = curve_point_or_throw(p, sb.position, sb.tangent, xb);
    const Vec4 tya = singular_tangent(p, ya, &sa.tangent);
    const Vec4 tyb = singular_tangent(p, yb, &sb.tangent);
    pa = image_of(p, ya);
    pb = image_of(p, yb);
    ta = image_tangent(p, ya, tya) / tya.dot(sa.tangent);
    tb = image_tangent(p, yb, tyb) / tyb.dot(sb.tangent);
    const Vec2 r = pb - pa;
    if (r.norm() < 1e-14) break;
    Eigen::Matrix2d m;
    m.col(0) = ta;
    m.col(1) = -tb;
    const Eigen::Vector2d d = m.colPivHouseholderQr().solve(r);
    xa += d[0];
    xb += d[1];
  }
  const double c = std::abs(ta.normalized().dot(tb.normalized()));
  angle = std::acos(std::min(1.0, c));
  return 0.5 * (pa + pb);
}

}  // namespace

std::vector<ImageCrossing> find_crossings(const SingularProblem& p, const std::vector<TracedLoop>& loops,
                                          double step) {
  std::vector<Segment> segs;
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  double longest = 0.0;
  for (std::size_t l = 0; l < loops.size(); ++l) {
    const auto& s = loops[l].samples;
    for (std::size_t i = 0; i < segment_count(loops[l]); ++i) {
      const Segment seg{static_cast<int>(l), i, s[i].image, s[(i + 1) % s.size()].image};
      lo = lo.cwiseMin(seg.a).cwiseMin(seg.b);
      hi = hi.cwiseMax(seg.a).cwiseMax(seg.b);
      longest = std::max(longest, (seg.b - seg.a).norm());
      segs.push_back(seg);
    }
  }
  if (segs.empty()) return {};
  const double extent = std::max((hi - lo).maxCoeff(), 1e-12);
  const double cell = std::max({extent / 512.0, longest, step * 1e-3});
  std::map<std::pair<long, long>, std::vector<std::size_t>> grid;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const Vec2 smin = segs[k].a.cwiseMin(segs[k].b) - lo;
    const Vec2 smax = segs[k].a.cwiseMax(segs[k].b) - lo;
    for (long gx = static_cast<long>(smin.x() / cell); gx <= static_cast<long>(smax.x() / cell); ++gx)
      for (long gy = static_cast<long>(smin.y() / cell); gy <= static_cast<long>(smax.y() / cell); ++gy)
        grid[{gx, gy}].push_back(k);
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [key, members] : grid)
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y)
        pairs.emplace_back(std::min(members[x], members[y]), std::max(members[x], members[y]));
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

  std::vector<ImageCrossing> out;
  for (const auto& [i, j] : pairs) {
    const Segment& s = segs[i];
    const Segment& t = segs[j];
    if (adjacent(s, t, loops)) continue;
    const Vec2 d1 = s.b - s.a, d2 = t.b - t.a, w = t.a - s.a;
    const double den = cross2(d1, d2);
    const double scale = d1.norm() * d2.norm();
    if (std::abs(den) <= 1e-12 * scale) {
      // parallel chords: report overlapping collinear contact
      if (scale == 0.0 || std::abs(cross2(d1, w)) > 1e-9 * d1.norm()) continue;
      const double l2 = d1.squaredNorm();
      const double u0 = w.dot(d1) / l2, u1 = (t.b - s.a).dot(d1) / l2;
      if (std::max(u0, u1) < 0.0 || std::min(u0, u1) > 1.0) continue;
      out.push_back({s.a + std::clamp(u0, 0.0, 1.0) * d1, s.loop, s.index, t.loop, t.index, 0.0});
      continue;
    }
    const double u = cross2(w, d2) / den;
    const double v = cross2(w, d1) / den;
    if (u < 0.0 || u >= 1.0 || v < 0.0 || v >= 1.0) continue;
    ImageCrossing c{s.a + u * d1, s.loop, s.index, t.loop, t.index, 0.0};
    const auto& la = loops[static_cast<std::size_t>(s.loop)];
    const auto& lb = loops[static_cast<std::size_t>(t.loop)];
    try {
      c.position = refine_crossing(p, la, s.index, u, lb, t.index, v, c.angle);
    } catch (const Error&) {
      c.angle = std::acos(std::min(1.0, std::abs(d1.normalized().dot(d2.normalized()))));
    }
    out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const ImageCrossing& a, const ImageCrossing& b) {
    if (a.position.x() != b.position.x()) return a.position.x() < b.position.x();
    return a.position.y() < b.position.y();
  });
  return out;
}

StabilityReport verify_stability(const SingularCurveSet& curves) {
  StabilityReport r;
  auto issue = [&](const std::string& what, const Vec2& where) {
    r.pass = false;
    r.issues.push_back({what, where});
  };
  if (curves.loops.empty()) issue("empty singular set", Vec2::Zero());
  for (std::size_t l = 0; l < curves.loops.size(); ++l) {
    const TracedLoop& loop = curves.loops[l];
    if (!loop.closed) issue("loop " + std::to_string(l) + " is not closed", loop.samples.front().image);
    if (loop.cusps.size() % 2 != 0) issue("loop " + std::to_string(l) + " has an odd number of cusps", loop.samples.front().image);
    for (const auto& s : loop.samples)
      if (s.fold_kind != FoldKind::Cusp && (s.fold_kind == FoldKind::Definite) != (s.gray_side != Side::None))
        issue("sample is neither a classified fold nor a cusp", s.image);
  }
  if (!curves.problem) return r;
  const auto crossings = find_crossings(*curves.problem, curves.loops, curves.step);
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    const auto& c = crossings[i];
    if (!(c.angle > kCrossingMinAngle)) issue("non-transverse double point", c.position);
    for (std::size_t j = i + 1; j < crossings.size(); ++j)
      if ((crossings[j].position - c.position).norm() < kTriplePointRadius) issue("triple point", c.position);
    for (const auto& loop : curves.loops)
      for (const auto& cu : loop.cusps)
        if ((loop.samples[cu.sample].image - c.position).norm() < kCrossingCuspClearance)
          issue("double point on a cusp", c.position);
  }
  return r;
}

// ---------------------------------------------------------------------------
// full trace

namespace {

struct SampleHash {
  double cell;
  std::unordered_map<std::uint64_t, std::vector<Vec4>> buckets;

  std::array<long, 4> key(const Vec4& x) const {
    return {static_cast<long>(std::floor(x[0] / cell)), static_cast<long>(std::floor(x[1] / cell)),
            static_cast<long>(std::floor(x[2] / cell)), static_cast<long>(std::floor(x[3] / cell))};
  }
  static std::uint64_t pack(const std::array<long, 4>& k) {
    std::uint64_t h = 1469598103934665603ull;
    for (long v : k) h = (h ^ static_cast<std::uint64_t>(v + (1 << 20))) * 1099511628211ull;
    return h;
  }
  void insert(const Vec4& x) { buckets[pack(key(x))].push_back(x); }
  bool near(const Vec4& x, double radius) const {
    const auto k = key(x);
    for (int d = 0; d < 81; ++d) {
      std::array<long, 4> q = k;
      int r = d;
      for (int a = 0; a < 4; ++a) {
        q[a] += r % 3 - 1;
        r /= 3;
      }
      const auto it = buckets.find(pack(q));
      if (it == buckets.end()) continue;
      for (const Vec4& y : it->second)
        if ((y - x).norm() < radius) return true;
    }
    return false;
  }
};

bool lex_less(const Vec4& a, const Vec4& b) {
  return std::lexicographical_compare(a.data(), a.data() + 4, b.data(), b.data() + 4);
}

// Starts the loop at its lexicographically smallest sample and fixes the orientation by
// the sign of the first tangent component (after x1, which is near zero there) of
// magnitude above 0.1.
void canonicalize(TracedLoop& loop) {
  auto& s = loop.samples;
  const auto first = std::min_element(s.begin(), s.end(),
                                      [](const SingularSample& a, const SingularSample& b) { return lex_less(a.position, b.position); });
  std::rotate(s.begin(), first, s.end());
  const Vec4& t = s.front().tangent;
  int j = 1;
  while (j < 3 && std::abs(t[j]) <= 0.1) ++j;
  if (t[j] < 0.0) {
    std::reverse(s.begin() + 1, s.end());
    for (auto& x : s) {
      x.tangent = -x.tangent;
      x.tangent_image = -x.tangent_image;
    }
  }
  recompute_arclength(loop);
}

}  // namespace

SingularCurveSet trace_singular_set(const SingularProblem& p, const TraceParams& params, const LogSink& log) {
  if (!(params.step >= 1e-4 && params.step <= 1e-1))
    throw Error(ErrorKind::InvalidArgument, "step must lie in [1e-4, 1e-1]");
  SingularCurveSet out;
  out.problem = std::make_shared<const SingularProblem>(p);
  out.step = params.step;

  const std::vector<Vec4> seeds = seed_points(p.manifold, params.seeds.count);
  std::vector<std::optional<Vec4>> refined(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t i) { refined[i] = correct_to_singular_set(p, seeds[i]); });

  std::vector<Vec4> candidates;
  for (const auto& r : refined)
    if (r) candidates.push_back(*r);
  if (candidates.empty())
    throw Error(ErrorKind::NoSingularSet, "no seed converged to the singular set (internal error)");
  std::sort(candidates.begin(), candidates.end(), lex_less);
  if (log) log("seeds: " + std::to_string(seeds.size()) + " sampled, " + std::to_string(candidates.size()) + " converged");

  for (const Vec4& c : candidates) {
    Eigen::JacobiSVD<Eigen::Matrix<double, 5, 4>> svd(singular_jacobian(p, c));
    const auto& s = svd.singularValues();
    if (s[2] < 1e-6 * std::max(1.0, s[0]))
      throw Error(ErrorKind::NotStable, "singular set is not a curve: rank condition degenerate");
  }

  const double radius = 10.0 * params.step;
  SampleHash hash{radius, {}};
  for (const Vec4& c : candidates) {
    if (hash.near(c, radius)) continue;
    TracedLoop loop = trace_curve(p, c, params.step);
    if (!loop.closed) throw Error(ErrorKind::TraceStalled, "singular curve does not close");
    for (const auto& s : loop.samples) hash.insert(s.position);
    canonicalize(loop);
    if (log) log("loop " + std::to_string(out.loops.size()) + ": " + std::to_string(loop.samples.size()) +
                 " samples, length " + format_double(loop.length));
    out.loops.push_back(std::move(loop));
  }

  parallel_for(out.loops.size(), [&](std::size_t l) {
    detect_cusps(p, out.loops[l], params.step);
    label_loop(p, out.loops[l], params.step);
  });
  std::sort(out.loops.begin(), out.loops.end(), [](const TracedLoop& a, const TracedLoop& b) {
    return lex_less(a.samples.front().position, b.samples.front().position);
  });
  for (std::size_t l = 0; l < out.loops.size(); ++l)
    if (log) log("loop " + std::to_string(l) + ": " + std::to_string(out.loops[l].cusps.size()) + " cusps");
  out.crossings = find_crossings(p, out.loops, params.step);
  if (log) log("crossings: " + std::to_string(out.crossings.size()));
  return out;
}

// ---------------------------------------------------------------------------
// graphic extraction

namespace {

struct RawFeature {
  double key = 0.0;  // sample index plus fraction of the following segment
  Feature feature;
};

struct CurveCursor {
  const SingularProblem& p;
  Vec4 base;
  Vec4 t;

  std::pair<Vec4, Vec2> at(double sigma) const {
    const Vec4 y = curve_point_or_throw(p, base, t, sigma);
    const Vec4 ty = singular_tangent(p, y, &t);
    return {y, image_tangent(p, y, ty)};
  }
};

// Bisection for a sign change of component(sigma) on [lo, hi].
double bisect(const std::function<double(double)>& fn, double lo, double hi, double f_lo) {
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double v = fn(mid);
    if ((v < 0.0) == (f_lo < 0.0)) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Key of a point of the curve lying between samples `from` and `to` (cyclic), by
// projection onto the closest chord in R^4.
double nearest_key(const TracedLoop& loop, const Vec4& y, std::size_t from, std::size_t to) {
  const auto& s = loop.samples;
  const std::size_t n = s.size();
  double best = 1e300, key = static_cast<double>(from);
  for (std::size_t i = from;; i = (i + 1) % n) {
    const Vec4& a = s[i].position;
    const Vec4 d = s[(i + 1) % n].position - a;
    const double u = std::clamp((y - a).dot(d) / d.squaredNorm(), 0.0, 1.0 - 1e-15);
    const double dist = (a + u * d - y).norm();
    if (dist < best) {
      best = dist;
      key = static_cast<double>(i) + u;
    }
    if (i == to) break;
  }
  return key;
}

std::vector<RawFeature> loop_features(const SingularProblem& p, const TracedLoop& loop) {
  const auto& s = loop.samples;
  const std::size_t n = s.size();
  std::vector<RawFeature> out;
  constexpr double kCuspOffset = 1e-6;

  for (const CuspInfo& c : loop.cusps) {
    Feature f;
    f.kind = FeatureKind::Cusp;
    f.position = s[c.sample].image;
    f.tip_direction = c.tip_direction;
    f.branch_labels = c.branch_labels;
    f.slope_sign = slope_sign_of_direction(c.tip_direction);
    out.push_back({static_cast<double>(c.sample), f});
  }

  auto sample_fraction = [&](std::size_t i, double sigma) {
    const double end = s[i].tangent.dot(s[(i + 1) % n].position - s[i].position);
    return static_cast<double>(i) + std::clamp(sigma / end, 0.0, 1.0 - 1e-15);
  };

  // horizontal and vertical points
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    const CurveCursor cur{p, s[i].position, s[i].tangent};
    const double end = s[i].tangent.dot(s[j].position - s[i].position);
    double lo = 0.0, hi = end;
    Vec2 ta = s[i].tangent_image, tb = s[j].tangent_image;
    if (s[i].fold_kind == FoldKind::Cusp) {
      lo = kCuspOffset;
      ta = cur.at(lo).second;
    }
    if (s[j].fold_kind == FoldKind::Cusp) {
      hi = end - kCuspOffset;
      tb = cur.at(hi).second;
    }
    for (int axis = 0; axis < 2; ++axis) {
      if ((ta[axis] < 0.0) == (tb[axis] < 0.0)) continue;
      const double root = bisect([&](double x) { return cur.at(x).second[axis]; }, lo, hi, ta[axis]);
      Feature f;
      f.position = image_of(p, cur.at(root).first);
      const bool increasing = tb[axis] > ta[axis];
      if (axis == 1) {
        f.kind = FeatureKind::Horizontal;
        f.convexity = increasing ? Convexity::Down : Convexity::Up;
        f.slope_sign = SlopeSign::Zero;
      } else {
        f.kind = FeatureKind::Vertical;
        f.convexity = increasing ? Convexity::Left : Convexity::Right;
        f.slope_sign = SlopeSign::Infinite;
      }
      out.push_back({sample_fraction(i, root), f});
    }
  }

  // inflections: sign changes of the turning of consecutive image tangents
  std::vector<double> turn(n, 0.0);
  std::vector<bool> valid(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (s[i].fold_kind == FoldKind::Cusp || s[j].fold_kind == FoldKind::Cusp) continue;
    turn[i] = cross2(s[i].tangent_image, s[j].tangent_image);
    valid[i] = turn[i] != 0.0;
  }
  constexpr double kDelta = 1e-4;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1) % n;
    if (!valid[i]) continue;
    if (!valid[j]) {
      // curvature keeps its sign through a cusp; a change across one means an inflection
      // on one of the two segments next to the cusp
      std::size_t k = j;
      while (!valid[k] && k != i) k = (k + 1) % n;
      if (k == i || (turn[k] < 0.0) == (turn[i] < 0.0)) continue;
      std::size_t c = j;
      while (s[c].fold_kind != FoldKind::Cusp && c != k) c = (c + 1) % n;
      if (s[c].fold_kind != FoldKind::Cusp)
        throw Error(ErrorKind::FeatureTooClose, "inflection point not resolved at this step");
      const CurveCursor cur{p, s[c].position, s[c].tangent};
      auto curvature = [&](double x) {
        return cross2(cur.at(x).second, cur.at(x + kDelta).second - cur.at(x - kDelta).second);
      };
      const double far_lo = s[c].tangent.dot(s[i].position - s[c].position);
      const double far_hi = s[c].tangent.dot(s[(k + 1) % n].position - s[c].position);
      const double near = 2.0 * kDelta;
      const double kl = curvature(far_lo), knl = curvature(-near), knr = curvature(near), kr = curvature(far_hi);
      double root;
      if ((kl < 0.0) != (knl < 0.0)) root = bisect(curvature, far_lo, -near, kl);
      else if ((knr < 0.0) != (kr < 0.0)) root = bisect(curvature, near, far_hi, knr);
      else throw Error(ErrorKind::FeatureTooClose, "inflection point within 2e-4 of a cusp; re-trace at a smaller step");
      const auto [y, tau] = cur.at(root);
      Feature f;
      f.kind = FeatureKind::Inflection;
      f.position = image_of(p, y);
      f.convexity = Convexity::None;
      f.slope_sign = slope_sign_of_direction(tau.normalized());
      out.push_back({nearest_key(loop, y, i, (k + 1) % n), f});
      continue;
    }
    if ((turn[i] < 0.0) == (turn[j] < 0.0)) continue;
    const std::size_t k = (j + 1) % n;
    const CurveCursor cur{p, s[i].position, s[i].tangent};
    auto curvature = [&](double x) {
      const Vec2 t0 = cur.at(x).second;
      return cross2(t0, cur.at(x + kDelta).second - cur.at(x - kDelta).second);
    };
    const double mid = s[i].tangent.dot(s[j].position - s[i].position);
    const double end = s[i].tangent.dot(s[k].position - s[i].position);
    const double c0 = curvature(0.0), cm = curvature(mid), c1 = curvature(end);
    double root;
    if ((c0 < 0.0) != (cm < 0.0)) root = bisect(curvature, 0.0, mid, c0);
    else if ((cm < 0.0) != (c1 < 0.0)) root = bisect(curvature, mid, end, cm);
    else root = mid;
    const auto [y, tau] = cur.at(root);
    Feature f;
    f.kind = FeatureKind::Inflection;
    f.position = image_of(p, y);
    f.convexity = Convexity::None;
    f.slope_sign = slope_sign_of_direction(tau.normalized());
    out.push_back({nearest_key(loop, y, i, k), f});
  }

  std::sort(out.begin(), out.end(), [](const RawFeature& a, const RawFeature& b) { return a.key < b.key; });
  return out;
}

double arclength_at(const TracedLoop& loop, double key) {
  const std::size_t n = loop.samples.size();
  const std::size_t i = static_cast<std::size_t>(key);
  const double frac = key - static_cast<double>(i);
  const double seg = (loop.samples[(i + 1) % n].position - loop.samples[i].position).norm();
  return loop.samples[i].arclength + frac * seg;
}

}  // namespace

Graphic extract_graphic(const SingularCurveSet& curves) {
  if (curves.loops.empty()) throw Error(ErrorKind::NoSingularSet, "empty singular curve set");
  if (!curves.problem) throw Error(ErrorKind::InvalidArgument, "curve set carries no problem");
  const SingularProblem& p = *curves.problem;
  Graphic g;
  std::vector<std::vector<double>> keys(curves.loops.size());

  for (std::size_t l = 0; l < curves.loops.size(); ++l) {
    const TracedLoop& loop = curves.loops[l];
    const auto& s = loop.samples;
    const std::size_t n = s.size();
    std::vector<RawFeature> raw = loop_features(p, loop);
    if (raw.empty()) throw Error(ErrorKind::TraceStalled, "loop without horizontal or vertical points");

    for (std::size_t k = 0; k < raw.size(); ++k) {
      const double a = arclength_at(loop, raw[k].key);
      double b = arclength_at(loop, raw[(k + 1) % raw.size()].key);
      if (k + 1 == raw.size()) b += loop.length;
      if (raw.size() > 1 && b - a < kFeatureSeparation)
        throw Error(ErrorKind::FeatureTooClose, "two features within 1e-6 arclength; re-trace at a smaller step");
    }

    const auto first = std::min_element(raw.begin(), raw.end(), [](const RawFeature& a, const RawFeature& b) {
      const Vec2& x = a.feature.position;
      const Vec2& y = b.feature.position;
      return x.x() != y.x() ? x.x() < y.x() : x.y() < y.y();
    });
    std::rotate(raw.begin(), first, raw.end());

    Loop out;
    const std::size_t m = raw.size();
    for (std::size_t k = 0; k < m; ++k) {
      out.features.push_back(raw[k].feature);
      keys[l].push_back(raw[k].key);
      const double a = raw[k].key;
      double b = raw[(k + 1) % m].key;
      if (b <= a) b += static_cast<double>(n);
      Arc arc;
      arc.points.push_back(raw[k].feature.position);
      std::optional<std::size_t> label_sample;
      for (long j = static_cast<long>(std::floor(a)) + 1; static_cast<double>(j) < b; ++j) {
        const std::size_t idx = static_cast<std::size_t>(j) % n;
        arc.points.push_back(s[idx].image);
        if (!label_sample && s[idx].fold_kind != FoldKind::Cusp) label_sample = idx;
      }
      arc.points.push_back(raw[(k + 1) % m].feature.position);
      if (!label_sample) {
        std::size_t idx = static_cast<std::size_t>(std::floor(a)) % n;
        if (s[idx].fold_kind == FoldKind::Cusp) idx = (idx + 1) % n;
        label_sample = idx;
      }
      const SingularSample& ls = s[*label_sample];
      arc.label = ls.fold_kind == FoldKind::Indefinite ? FoldLabel::Indefinite : FoldLabel::Definite;
      arc.gray_side = arc.label == FoldLabel::Definite ? ls.gray_side : Side::None;
      out.arcs.push_back(std::move(arc));
    }
    g.loops.push_back(std::move(out));
  }

  auto arc_of = [&](int loop, std::size_t segment, const Vec2& pos) {
    const TracedLoop& tl = curves.loops[static_cast<std::size_t>(loop)];
    const std::size_t n = tl.samples.size();
    const Vec2 a = tl.samples[segment].image;
    const Vec2 b = tl.samples[(segment + 1) % n].image;
    const double l2 = (b - a).squaredNorm();
    const double u = l2 > 0 ? std::clamp((pos - a).dot(b - a) / l2, 0.0, 1.0 - 1e-15) : 0.0;
    const double key = static_cast<double>(segment) + u;
    const auto& k = keys[static_cast<std::size_t>(loop)];
    // features are rotated: find the arc whose cyclic key interval contains `key`
    const std::size_t m = k.size();
    for (std::size_t i = 0; i < m; ++i) {
      const double lo = k[i];
      double hi = k[(i + 1) % m];
      double x = key;
      if (hi <= lo) {
        hi += static_cast<double>(n);
        if (x < lo) x += static_cast<double>(n);
      }
      if (x >= lo && x < hi) return static_cast<int>(i);
    }
    return 0;
  };
  for (const ImageCrossing& c : curves.crossings) {
    Crossing x;
    x.position = c.position;
    x.first = {c.loop_a, arc_of(c.loop_a, c.segment_a, c.position)};
    x.second = {c.loop_b, arc_of(c.loop_b, c.segment_b, c.position)};
    x.angle = c.angle;
    g.crossings.push_back(x);
  }
  return g;
}

}  // namespace rsg
