// Immutable scalar symbolic expressions: construction, simplification,
// differentiation and tree-walking evaluation.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>

#include "pcbf/error.hpp"

namespace pcbf {

enum class Op : std::uint8_t {
  Constant,
  Variable,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Tanh,
};

/// Number of children a node of this kind carries.
std::size_t arity(Op op) noexcept;

/// Function name for the unary function kinds (sin, cos, ...), empty otherwise.
std::string_view function_name(Op op) noexcept;

struct ExprNode;

/// Handle to an immutable expression DAG node. Copying is cheap and the
/// underlying nodes may be shared freely between threads.
///
/// The arithmetic operators and the free functions below (sin, exp, ...)
/// apply the local rewrite rules of simplify() as they build, so expressions
/// assembled programmatically stay compact. Expr::make builds a node verbatim.
class Expr {
 public:
  /// The zero constant.
  Expr();
  /// A constant; throws std::invalid_argument for NaN or infinity.
  Expr(double value);  // NOLINT(google-explicit-constructor)

  static Expr constant(double value);
  /// Throws std::invalid_argument unless `name` matches [A-Za-z_][A-Za-z0-9_]*.
  static Expr variable(std::string_view name);
  static bool is_identifier(std::string_view name) noexcept;
  /// Builds a node with no rewriting at all.
  static Expr make(Op op, Expr lhs, Expr rhs = Expr());

  Op op() const noexcept;
  double value() const noexcept;
  const std::string& name() const noexcept;
  Expr lhs() const;
  Expr rhs() const;
  Expr arg() const { return lhs(); }

  bool is_constant() const noexcept { return op() == Op::Constant; }
  bool is_constant(double v) const noexcept {
    return is_constant() && value() == v;
  }
  bool is_variable() const noexcept { return op() == Op::Variable; }

  /// Structural hash, computed once at construction.
  std::size_t hash() const noexcept;
  /// Node identity (stable while any handle is alive).
  const ExprNode* id() const noexcept { return node_.get(); }

 private:
  friend struct ExprAccess;
  explicit Expr(std::shared_ptr<const ExprNode> node)
      : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
inline Expr& operator+=(Expr& a, const Expr& b) { return a = a + b; }
inline Expr& operator-=(Expr& a, const Expr& b) { return a = a - b; }
inline Expr& operator*=(Expr& a, const Expr& b) { return a = a * b; }

Expr pow(const Expr& base, const Expr& exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr tan(const Expr& a);
Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sqrt(const Expr& a);
Expr tanh(const Expr& a);

/// Applies a unary function or binary operator node kind through the
/// rewriting constructors.
Expr apply(Op op, const Expr& lhs, const Expr& rhs = Expr());

/// Constant folding plus x+0, x*1, x*0, x^1 (and a few siblings) applied
/// bottom-up until nothing changes.
Expr simplify(const Expr& e);

/// Exact partial derivative d e / d var. Shared subtrees are differentiated
/// once.
Expr differentiate(const Expr& e, std::string_view var);

/// Replaces variables by expressions.
Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements);

using Binding = std::map<std::string, double, std::less<>>;

/// Recursive-descent evaluation. Throws UnboundVariable or DomainError.
double evaluate(const Expr& e, const Binding& binding);

std::set<std::string> free_variables(const Expr& e);
bool depends_on(const Expr& e, std::string_view var);

/// Number of distinct nodes in the DAG.
std::size_t node_count(const Expr& e);

/// Infix rendering with minimal parentheses; parse(to_string(e)) evaluates
/// identically to e.
std::string to_string(const Expr& e);

/// Numeric kernel shared by folding, tree evaluation and compiled programs.
/// Returns NaN for out-of-domain arguments rather than throwing.
double apply_numeric(Op op, double a, double b) noexcept;

/// True if apply_numeric(op, a, b) is a domain violation (log of a
/// non-positive number, division by zero, sqrt of a negative number, ...).
bool domain_violation(Op op, double a, double b) noexcept;

}  // namespace pcbf
