#pragma once

#include <string>

#include <Eigen/Core>

#include "rsg/expr.hpp"

namespace rsg {

using Mat43 = Eigen::Matrix<double, 4, 3>;
using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

/// A closed 3-manifold given as the level set {C = level} in R^4.
struct ImplicitThreeManifold {
  Expression constraint;
  double level = 1.0;
  std::string name;

  /// Unit 3-sphere x1^2+x2^2+x3^2+x4^2 = 1.
  static ImplicitThreeManifold sphere();
};

inline constexpr double kMinNormalNorm = 1e-8;
inline constexpr double kRetractTolerance = 1e-12;
inline constexpr int kRetractMaxIterations = 50;

/// Newton projection along grad C until |C(q) - level| <= 1e-12. Intended for points
/// with |C(p) - level| < 0.5 but not restricted to them. Throws RetractDiverged.
Vec4 retract(const ImplicitThreeManifold& m, const Vec4& p);

struct TangentFrame {
  Mat43 basis;   // orthonormal columns, orthogonal to grad C
  int pivot;     // coordinate of the largest |normal| component
};

/// Householder complement of the unit normal. With v = n + sign(n_k) e_k (k the pivot),
/// H = I - 2 v v^T / v^T v maps n to -sign(n_k) e_k; the columns H e_j, j != k, in
/// increasing j are returned. Throws DegenerateNormal if |grad C| < 1e-8.
TangentFrame tangent_frame(const ImplicitThreeManifold& m, const Vec4& p);
Mat43 tangent_basis(const ImplicitThreeManifold& m, const Vec4& p);

/// Householder complement for an explicit normal vector (not necessarily unit).
TangentFrame householder_complement(const Vec4& normal);

/// First- and second-order data of a function restricted to M at a point of M.
struct ConstrainedJet {
  double value = 0.0;
  Vec4 ambient_gradient;     // grad f
  Vec4 projected_gradient;   // grad f - lambda grad C
  double multiplier = 0.0;   // lambda = <grad f, grad C> / |grad C|^2
  Mat4 lagrangian_hessian;   // Hess f - lambda Hess C (ambient)
};

ConstrainedJet constrained_jet(const Expression& f, const ImplicitThreeManifold& m, const Vec4& p);
ConstrainedJet constrained_jet(const Jet2& f, const Jet2& c);

/// Intrinsic Hessian in the given tangent basis: B^T (Hess f - lambda Hess C) B.
Mat3 intrinsic_hessian(const ConstrainedJet& j, const Mat43& basis);

}  // namespace rsg
