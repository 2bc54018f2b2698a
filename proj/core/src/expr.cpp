#include "rsg/expr.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <iomanip>
#include <vector>

#include "rsg/error.hpp"

namespace rsg {

// ---------------------------------------------------------------------------
// Jet2 arithmetic

Jet2 Jet2::constant(double v) {
  Jet2 j;
  j.value = v;
  return j;
}

Jet2 Jet2::variable(int index, double v) {
  Jet2 j;
  j.value = v;
  j.grad[index] = 1.0;
  return j;
}

Mat4 Jet2::hessian() const {
  Mat4 h;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) h(i, j) = hess(i, j);
  return h;
}

Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value + b.value;
  r.grad = a.grad + b.grad;
  for (int k = 0; k < 10; ++k) r.hess_upper[k] = a.hess_upper[k] + b.hess_upper[k];
  return r;
}

Jet2 operator-(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value - b.value;
  r.grad = a.grad - b.grad;
  for (int k = 0; k < 10; ++k) r.hess_upper[k] = a.hess_upper[k] - b.hess_upper[k];
  return r;
}

Jet2 operator-(const Jet2& a) {
  Jet2 r;
  r.value = -a.value;
  r.grad = -a.grad;
  for (int k = 0; k < 10; ++k) r.hess_upper[k] = -a.hess_upper[k];
  return r;
}

Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r;
  r.value = a.value * b.value;
  r.grad = a.value * b.grad + b.value * a.grad;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      r.hess(i, j) = a.value * b.hess(i, j) + b.value * a.hess(i, j) + a.grad[i] * b.grad[j] +
                     a.grad[j] * b.grad[i];
  return r;
}

namespace {

// Composition with a scalar function phi given phi(v), phi'(v), phi''(v).
Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
  Jet2 r;
  r.value = f0;
  r.grad = f1 * a.grad;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) r.hess(i, j) = f1 * a.hess(i, j) + f2 * a.grad[i] * a.grad[j];
  return r;
}

}  // namespace

Jet2 operator/(const Jet2& a, const Jet2& b) {
  if (b.value == 0.0) throw Error(ErrorKind::Domain, "division by zero");
  const double inv = 1.0 / b.value;
  // 1/b: phi' = -1/b^2, phi'' = 2/b^3
  return a * chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}

Jet2 pow(const Jet2& a, int n) {
  if (n == 0) return Jet2::constant(1.0);
  if (n < 0) {
    if (a.value == 0.0) throw Error(ErrorKind::Domain, "negative power of zero");
    return Jet2::constant(1.0) / pow(a, -n);
  }
  const double v = a.value;
  const double f0 = std::pow(v, n);
  const double f1 = n * std::pow(v, n - 1);
  const double f2 = n >= 2 ? double(n) * double(n - 1) * std::pow(v, n - 2) : 0.0;
  return chain(a, f0, f1, f2);
}

Jet2 sin(const Jet2& a) {
  const double s = std::sin(a.value), c = std::cos(a.value);
  return chain(a, s, c, -s);
}

Jet2 cos(const Jet2& a) {
  const double s = std::sin(a.value), c = std::cos(a.value);
  return chain(a, c, -s, -c);
}

Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.value);
  return chain(a, e, e, e);
}

// ---------------------------------------------------------------------------
// Expression construction

namespace {

std::shared_ptr<const ExprNode> make_node(NodeKind kind, std::shared_ptr<const ExprNode> lhs = nullptr,
                                          std::shared_ptr<const ExprNode> rhs = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

std::shared_ptr<const ExprNode> make_constant(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Constant;
  n->constant = v;
  return n;
}

std::shared_ptr<const ExprNode> make_variable(int index) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  n->variable = index;
  return n;
}

std::shared_ptr<const ExprNode> make_power(std::shared_ptr<const ExprNode> base, int exponent) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Power;
  n->exponent = exponent;
  n->lhs = std::move(base);
  return n;
}

}  // namespace

Expression Expression::constant(double v) { return Expression(make_constant(v)); }

Expression Expression::variable(int index) {
  if (index < 1 || index > 4) throw Error(ErrorKind::InvalidArgument, "variable index out of range");
  return Expression(make_variable(index));
}

#define RSG_BINARY(op, kind)                                              \
  Expression operator op(const Expression& a, const Expression& b) {      \
    return Expression(make_node(NodeKind::kind, a.root_, b.root_));       \
  }
RSG_BINARY(+, Add)
RSG_BINARY(-, Subtract)
RSG_BINARY(*, Multiply)
RSG_BINARY(/, Divide)
#undef RSG_BINARY

Expression operator-(const Expression& a) {
  if (a.root_->kind == NodeKind::Constant) return Expression(make_constant(-a.root_->constant));
  return Expression(make_node(NodeKind::Negate, a.root_));
}
Expression pow(const Expression& a, int n) { return Expression(make_power(a.root_, n)); }
Expression sin(const Expression& a) { return Expression(make_node(NodeKind::Sin, a.root_)); }
Expression cos(const Expression& a) { return Expression(make_node(NodeKind::Cos, a.root_)); }
Expression exp(const Expression& a) { return Expression(make_node(NodeKind::Exp, a.root_)); }

namespace {

void render(const ExprNode& n, std::ostringstream& out) {
  switch (n.kind) {
    case NodeKind::Constant: {
      std::ostringstream num;
      num << std::setprecision(17) << n.constant;
      if (std::signbit(n.constant))
        out << '(' << num.str() << ')';
      else
        out << num.str();
      return;
    }
    case NodeKind::Variable: out << 'x' << n.variable; return;
    case NodeKind::Negate: out << "(-"; render(*n.lhs, out); out << ')'; return;
    case NodeKind::Power: out << '('; render(*n.lhs, out); out << '^' << n.exponent << ')'; return;
    case NodeKind::Sin: out << "sin("; render(*n.lhs, out); out << ')'; return;
    case NodeKind::Cos: out << "cos("; render(*n.lhs, out); out << ')'; return;
    case NodeKind::Exp: out << "exp("; render(*n.lhs, out); out << ')'; return;
    case NodeKind::Add:
    case NodeKind::Subtract:
    case NodeKind::Multiply:
    case NodeKind::Divide: {
      const char op = n.kind == NodeKind::Add        ? '+'
                      : n.kind == NodeKind::Subtract ? '-'
                      : n.kind == NodeKind::Multiply ? '*'
                                                     : '/';
      out << '(';
      render(*n.lhs, out);
      out << ' ' << op << ' ';
      render(*n.rhs, out);
      out << ')';
      return;
    }
  }
}

}  // namespace

std::string Expression::to_string() const {
  if (empty()) return "";
  std::ostringstream out;
  render(*root_, out);
  return out.str();
}

// ---------------------------------------------------------------------------
// Parser

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::shared_ptr<const ExprNode> parse_all() {
    skip_ws();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, {"expression"}, "empty input");
    auto e = parse_sum();
    skip_ws();
    if (pos_ < text_.size())
      throw SyntaxError(pos_, {"+", "-", "*", "/", "^", "end of input"},
                        std::string("unexpected '") + text_[pos_] + "'");
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::shared_ptr<const ExprNode> parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = make_node(NodeKind::Add, lhs, parse_product());
      else if (accept('-')) lhs = make_node(NodeKind::Subtract, lhs, parse_product());
      else return lhs;
    }
  }

  std::shared_ptr<const ExprNode> parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = make_node(NodeKind::Multiply, lhs, parse_unary());
      else if (accept('/')) lhs = make_node(NodeKind::Divide, lhs, parse_unary());
      else return lhs;
    }
  }

  std::shared_ptr<const ExprNode> parse_unary() {
    if (accept('-')) {
      auto operand = parse_unary();
      // a signed literal is a single constant, so rendered trees parse back unchanged
      if (operand->kind == NodeKind::Constant) return make_constant(-operand->constant);
      return make_node(NodeKind::Negate, operand);
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  std::shared_ptr<const ExprNode> parse_power() {
    auto base = parse_primary();
    while (accept('^')) base = make_power(base, parse_integer_exponent());
    return base;
  }

  int parse_integer_exponent() {
    skip_ws();
    const std::size_t start = pos_;
    bool negative = false;
    if (pos_ < text_.size() && (text_[pos_] == '-' || text_[pos_] == '+')) {
      negative = text_[pos_] == '-';
      ++pos_;
      skip_ws();
    }
    const std::size_t digits_start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (pos_ == digits_start) throw SyntaxError(pos_, {"integer exponent"}, "missing exponent");
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e' || text_[pos_] == 'E'))
      throw SyntaxError(start, {"integer exponent"}, "fractional exponents are not supported");
    if (pos_ - digits_start > 6) throw SyntaxError(start, {"integer exponent"}, "exponent too large");
    int value = std::stoi(std::string(text_.substr(digits_start, pos_ - digits_start)));
    return negative ? -value : value;
  }

  std::shared_ptr<const ExprNode> parse_primary() {
    skip_ws();
    if (pos_ >= text_.size())
      throw SyntaxError(pos_, {"number", "identifier", "("}, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = parse_sum();
      if (!accept(')')) throw SyntaxError(pos_, {")"}, "unbalanced parenthesis");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw SyntaxError(pos_, {"number", "identifier", "("}, std::string("unexpected '") + c + "'");
  }

  std::shared_ptr<const ExprNode> parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-')) ++look;
      if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    // strtod rounds the decimal literal correctly; this is the only rounding of input text.
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(literal.c_str(), &end);
    if (end != literal.c_str() + literal.size() || errno == ERANGE || literal == ".")
      throw SyntaxError(start, {"number"}, "malformed number '" + literal + "'");
    return make_constant(v);
  }

  std::shared_ptr<const ExprNode> parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    if (name.size() == 2 && name[0] == 'x' && name[1] >= '1' && name[1] <= '4')
      return make_variable(name[1] - '0');
    NodeKind fn;
    if (name == "sin") fn = NodeKind::Sin;
    else if (name == "cos") fn = NodeKind::Cos;
    else if (name == "exp") fn = NodeKind::Exp;
    else throw UnknownIdentifier(start, name);
    if (!accept('(')) throw SyntaxError(pos_, {"("}, "function call requires parentheses");
    auto arg = parse_sum();
    if (!accept(')')) throw SyntaxError(pos_, {")"}, "unbalanced parenthesis");
    return make_node(fn, arg);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

Jet2 eval_node(const ExprNode& n, const Vec4& p) {
  switch (n.kind) {
    case NodeKind::Constant: return Jet2::constant(n.constant);
    case NodeKind::Variable: return Jet2::variable(n.variable - 1, p[n.variable - 1]);
    case NodeKind::Negate: return -eval_node(*n.lhs, p);
    case NodeKind::Add: return eval_node(*n.lhs, p) + eval_node(*n.rhs, p);
    case NodeKind::Subtract: return eval_node(*n.lhs, p) - eval_node(*n.rhs, p);
    case NodeKind::Multiply: return eval_node(*n.lhs, p) * eval_node(*n.rhs, p);
    case NodeKind::Divide: return eval_node(*n.lhs, p) / eval_node(*n.rhs, p);
    case NodeKind::Power: return pow(eval_node(*n.lhs, p), n.exponent);
    case NodeKind::Sin: return sin(eval_node(*n.lhs, p));
    case NodeKind::Cos: return cos(eval_node(*n.lhs, p));
    case NodeKind::Exp: return exp(eval_node(*n.lhs, p));
  }
  return Jet2{};
}

double eval_value(const ExprNode& n, const Vec4& p) {
  switch (n.kind) {
    case NodeKind::Constant: return n.constant;
    case NodeKind::Variable: return p[n.variable - 1];
    case NodeKind::Negate: return -eval_value(*n.lhs, p);
    case NodeKind::Add: return eval_value(*n.lhs, p) + eval_value(*n.rhs, p);
    case NodeKind::Subtract: return eval_value(*n.lhs, p) - eval_value(*n.rhs, p);
    case NodeKind::Multiply: return eval_value(*n.lhs, p) * eval_value(*n.rhs, p);
    case NodeKind::Divide: {
      const double d = eval_value(*n.rhs, p);
      if (d == 0.0) throw Error(ErrorKind::Domain, "division by zero");
      return eval_value(*n.lhs, p) / d;
    }
    case NodeKind::Power: {
      const double b = eval_value(*n.lhs, p);
      if (n.exponent < 0 && b == 0.0) throw Error(ErrorKind::Domain, "negative power of zero");
      return std::pow(b, n.exponent);
    }
    case NodeKind::Sin: return std::sin(eval_value(*n.lhs, p));
    case NodeKind::Cos: return std::cos(eval_value(*n.lhs, p));
    case NodeKind::Exp: return std::exp(eval_value(*n.lhs, p));
  }
  return 0.0;
}

void require_finite(const Vec4& p) {
  if (!p.allFinite()) throw Error(ErrorKind::Domain, "evaluation point is not finite");
}

}  // namespace

Expression parse(std::string_view text) { return Expression(Parser(text).parse_all()); }

Jet2 eval_jet2(const Expression& e, const Vec4& p) {
  if (e.empty()) throw Error(ErrorKind::InvalidArgument, "empty expression");
  require_finite(p);
  return eval_node(e.root(), p);
}

double eval(const Expression& e, const Vec4& p) {
  if (e.empty()) throw Error(ErrorKind::InvalidArgument, "empty expression");
  require_finite(p);
  return eval_value(e.root(), p);
}

}  // namespace rsg
