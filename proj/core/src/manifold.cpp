#include "rsg/manifold.hpp"

#include <cmath>

#include "rsg/error.hpp"

namespace rsg {

ImplicitThreeManifold ImplicitThreeManifold::sphere() {
  return {parse("x1^2 + x2^2 + x3^2 + x4^2"), 1.0, "s3"};
}

Vec4 retract(const ImplicitThreeManifold& m, const Vec4& p) {
  Vec4 q = p;
  Jet2 c = eval_jet2(m.constraint, q);
  for (int it = 0; it < kRetractMaxIterations; ++it) {
    const double residual = c.value - m.level;
    if (std::abs(residual) <= kRetractTolerance) return q;
    const double n2 = c.grad.squaredNorm();
    if (n2 < kMinNormalNorm * kMinNormalNorm)
      throw Error(ErrorKind::DegenerateNormal, "retract: vanishing constraint gradient");
    q -= (residual / n2) * c.grad;
    c = eval_jet2(m.constraint, q);
  }
  if (std::abs(c.value - m.level) <= kRetractTolerance) return q;
  throw Error(ErrorKind::RetractDiverged, "retract: no convergence in 50 iterations");
}

TangentFrame householder_complement(const Vec4& normal) {
  const double norm = normal.norm();
  if (!(norm >= kMinNormalNorm))
    throw Error(ErrorKind::DegenerateNormal, "tangent basis: vanishing normal");
  const Vec4 n = normal / norm;
  int k = 0;
  n.cwiseAbs().maxCoeff(&k);
  Vec4 v = n;
  v[k] += n[k] >= 0.0 ? 1.0 : -1.0;
  const Mat4 h = Mat4::Identity() - (2.0 / v.squaredNorm()) * v * v.transpose();
  TangentFrame frame;
  frame.pivot = k;
  int col = 0;
  for (int j = 0; j < 4; ++j)
    if (j != k) frame.basis.col(col++) = h.col(j);
  return frame;
}

TangentFrame tangent_frame(const ImplicitThreeManifold& m, const Vec4& p) {
  return householder_complement(eval_jet2(m.constraint, p).grad);
}

Mat43 tangent_basis(const ImplicitThreeManifold& m, const Vec4& p) {
  return tangent_frame(m, p).basis;
}

ConstrainedJet constrained_jet(const Jet2& f, const Jet2& c) {
  const double n2 = c.grad.squaredNorm();
  if (n2 < kMinNormalNorm * kMinNormalNorm)
    throw Error(ErrorKind::DegenerateNormal, "constrained jet: vanishing constraint gradient");
  ConstrainedJet j;
  j.value = f.value;
  j.ambient_gradient = f.grad;
  j.multiplier = f.grad.dot(c.grad) / n2;
  j.projected_gradient = f.grad - j.multiplier * c.grad;
  j.lagrangian_hessian = f.hessian() - j.multiplier * c.hessian();
  return j;
}

ConstrainedJet constrained_jet(const Expression& f, const ImplicitThreeManifold& m, const Vec4& p) {
  return constrained_jet(eval_jet2(f, p), eval_jet2(m.constraint, p));
}

Mat3 intrinsic_hessian(const ConstrainedJet& j, const Mat43& basis) {
  Mat3 h = basis.transpose() * j.lagrangian_hessian * basis;
  return 0.5 * (h + h.transpose());
}

}  // namespace rsg
