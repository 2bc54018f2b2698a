#include "rsg/morse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "rsg/error.hpp"

namespace rsg {

namespace {

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  for (int i = index; i > 0; i /= base) {
    f /= base;
    r += f * (i % base);
  }
  return r;
}

constexpr int kNewtonMaxIterations = 60;
constexpr double kNewtonMaxStep = 0.3;

}  // namespace

std::vector<Vec4> seed_points(const ImplicitThreeManifold& m, int count) {
  std::vector<Vec4> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  const double radius = m.level > 0.0 ? std::sqrt(m.level) : 1.0;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (int i = 1; i <= count; ++i) {
    const double u = halton(i, 2);
    const double a = two_pi * halton(i, 3);
    const double b = two_pi * halton(i, 5);
    const double r1 = std::sqrt(u), r2 = std::sqrt(1.0 - u);
    Vec4 p(r1 * std::cos(a), r1 * std::sin(a), r2 * std::cos(b), r2 * std::sin(b));
    try {
      seeds.push_back(retract(m, radius * p));
    } catch (const Error&) {
    }
  }
  return seeds;
}

bool refine_critical_point(const Expression& f, const ImplicitThreeManifold& m, Vec4& point) {
  Vec4 x = point;
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kNewtonMaxIterations; ++it) {
    const ConstrainedJet cj = constrained_jet(f, m, x);
    const double residual = cj.projected_gradient.norm();
    best = std::min(best, residual);
    if (residual <= 1e-13 * std::max(1.0, cj.ambient_gradient.norm())) break;
    const Mat43 basis = tangent_basis(m, x);
    const Vec3 g = basis.transpose() * cj.projected_gradient;
    const Mat3 h = intrinsic_hessian(cj, basis);
    Eigen::FullPivLU<Mat3> lu(h);
    Vec3 step = lu.isInvertible() ? Vec3(-lu.solve(g)) : Vec3(-g);
    const double len = step.norm();
    if (!std::isfinite(len)) return false;
    if (len > kNewtonMaxStep) step *= kNewtonMaxStep / len;
    try {
      x = retract(m, x + basis * step);
    } catch (const Error&) {
      return false;
    }
    if (len < 1e-15) break;
  }
  const double final_residual = constrained_jet(f, m, x).projected_gradient.norm();
  if (!(final_residual <= kCriticalGradientTolerance)) return false;
  point = x;
  return true;
}

CriticalPoint classify_critical_point(const Expression& f, const ImplicitThreeManifold& m,
                                      const Vec4& position) {
  const ConstrainedJet cj = constrained_jet(f, m, position);
  const Mat3 h = intrinsic_hessian(cj, tangent_basis(m, position));
  Eigen::SelfAdjointEigenSolver<Mat3> eig(h, Eigen::EigenvaluesOnly);
  CriticalPoint cp;
  cp.position = position;
  cp.value = cj.value;
  cp.hessian_eigenvalues = eig.eigenvalues();
  cp.index = 0;
  for (int i = 0; i < 3; ++i) {
    const double ev = cp.hessian_eigenvalues[i];
    if (std::abs(ev) < kNondegeneracyTolerance)
      throw Error(ErrorKind::DegenerateCritical,
                  "constrained Hessian eigenvalue " + std::to_string(ev) + " at critical point");
    if (ev < 0.0) ++cp.index;
  }
  return cp;
}

std::vector<CriticalPoint> find_critical_points(const Expression& f, const ImplicitThreeManifold& m,
                                                const SeedGrid& seeds, const LogSink& log) {
  const std::vector<Vec4> starts = seed_points(m, seeds.count);
  std::vector<std::optional<Vec4>> refined(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    Vec4 x = starts[i];
    if (refine_critical_point(f, m, x)) refined[i] = x;
  });

  std::vector<Vec4> found;
  for (const auto& r : refined)
    if (r) found.push_back(*r);
  std::sort(found.begin(), found.end(), [](const Vec4& a, const Vec4& b) {
    return std::lexicographical_compare(a.data(), a.data() + 4, b.data(), b.data() + 4);
  });
  std::vector<Vec4> unique;
  for (const Vec4& p : found) {
    bool duplicate = false;
    for (const Vec4& q : unique)
      if ((p - q).norm() < kCriticalDedupRadius) {
        duplicate = true;
        break;
      }
    if (!duplicate) unique.push_back(p);
  }

  std::vector<CriticalPoint> points;
  points.reserve(unique.size());
  for (const Vec4& p : unique) points.push_back(classify_critical_point(f, m, p));

  std::array<int, 4> counts{};
  for (const auto& cp : points) ++counts[cp.index];
  if (counts[0] - counts[1] + counts[2] - counts[3] != 0 && log)
    log("SeedMiss: critical point index counts violate Euler parity for " + f.to_string());
  return points;
}

MorseProfile profile_from_counts(const std::array<int, 4>& counts) {
  MorseProfile p;
  p.counts = counts;
  if (counts[0] - counts[1] + counts[2] - counts[3] != 0)
    throw Error(ErrorKind::EulerViolation,
                "alternating index sum " + std::to_string(counts[0] - counts[1] + counts[2] - counts[3]));
  p.extrema_unique = counts[0] == 1 && counts[3] == 1;
  if (p.extrema_unique && counts[1] != counts[2])
    throw Error(ErrorKind::ProfileInvalid, "index-1 and index-2 counts differ");
  p.genus = counts[1];
  return p;
}

MorseProfile profile(std::span<const CriticalPoint> points) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "profile of an empty critical set");
  std::array<int, 4> counts{};
  for (const auto& cp : points) ++counts[cp.index];
  return profile_from_counts(counts);
}

}  // namespace rsg
