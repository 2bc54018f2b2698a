#pragma once

#include <array>
#include <memory>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace rsg {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Value, gradient and Hessian of a scalar function of (x1, x2, x3, x4).
///
/// The Hessian is stored as its upper triangle, row-major, so it is symmetric by
/// construction.
class Jet2 {
 public:
  Jet2() { grad.setZero(); hess_upper.fill(0.0); }

  static Jet2 constant(double v);
  static Jet2 variable(int index, double v);  // index in 0..3

  double value = 0.0;
  Vec4 grad;
  std::array<double, 10> hess_upper;

  double hess(int i, int j) const { return hess_upper[upper_index(i, j)]; }
  double& hess(int i, int j) { return hess_upper[upper_index(i, j)]; }
  Mat4 hessian() const;

  static constexpr int upper_index(int i, int j) {
    if (i > j) std::swap(i, j);
    // rows: 0 -> 0..3, 1 -> 4..6, 2 -> 7..8, 3 -> 9
    return i * 4 - (i * (i - 1)) / 2 + (j - i);
  }
};

Jet2 operator+(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a, const Jet2& b);
Jet2 operator-(const Jet2& a);
Jet2 operator*(const Jet2& a, const Jet2& b);
Jet2 operator/(const Jet2& a, const Jet2& b);
Jet2 pow(const Jet2& a, int n);
Jet2 sin(const Jet2& a);
Jet2 cos(const Jet2& a);
Jet2 exp(const Jet2& a);

struct ExprNode;

/// Immutable expression tree over x1..x4. Copies share the tree.
class Expression {
 public:
  Expression() = default;
  explicit Expression(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  static Expression constant(double v);
  static Expression variable(int index);  // 1..4

  friend Expression operator+(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a, const Expression& b);
  friend Expression operator*(const Expression& a, const Expression& b);
  friend Expression operator/(const Expression& a, const Expression& b);
  friend Expression operator-(const Expression& a);
  friend Expression pow(const Expression& a, int n);
  friend Expression sin(const Expression& a);
  friend Expression cos(const Expression& a);
  friend Expression exp(const Expression& a);

  bool empty() const { return root_ == nullptr; }
  const ExprNode& root() const { return *root_; }

  /// Fully parenthesized infix rendering; parses back to an identical tree.
  std::string to_string() const;

 private:
  std::shared_ptr<const ExprNode> root_;
};

enum class NodeKind { Constant, Variable, Negate, Add, Subtract, Multiply, Divide, Power, Sin, Cos, Exp };

struct ExprNode {
  NodeKind kind;
  double constant = 0.0;   // Constant
  int variable = 0;        // Variable, 1..4
  int exponent = 0;        // Power
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
};

/// Standard infix grammar: `^` (integer literal exponent) binds tighter than unary minus,
/// which binds tighter than `* /`, then `+ -`; binary operators are left-associative.
/// Throws SyntaxError or UnknownIdentifier.
Expression parse(std::string_view text);

/// Second-order forward evaluation. Throws Error(Domain) on division by zero or a
/// non-finite point.
Jet2 eval_jet2(const Expression& e, const Vec4& p);

/// Value only.
double eval(const Expression& e, const Vec4& p);

}  // namespace rsg
