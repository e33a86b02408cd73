#include "pcbf/expr.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace pcbf {

struct ExprNode {
  Op op = Op::Constant;
  double value = 0.0;
  std::string name;
  std::shared_ptr<const ExprNode> lhs;
  std::shared_ptr<const ExprNode> rhs;
  std::size_t hash = 0;
};

struct ExprAccess {
  static Expr wrap(std::shared_ptr<const ExprNode> node) { return Expr(std::move(node)); }
  static const std::shared_ptr<const ExprNode>& node(const Expr& e) { return e.node_; }
};

namespace {

std::size_t mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

bool valid_identifier(std::string_view name) {
  if (name.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  if (!alpha(name.front())) return false;
  for (char c : name) {
    if (!alpha(c) && !digit(c)) return false;
  }
  return true;
}

Expr make_node(Op op, double value, std::string name, std::shared_ptr<const ExprNode> lhs,
               std::shared_ptr<const ExprNode> rhs) {
  auto node = std::make_shared<ExprNode>();
  node->op = op;
  node->value = value;
  node->name = std::move(name);
  std::size_t h = std::hash<int>{}(static_cast<int>(op));
  if (op == Op::Constant) h = mix(h, std::hash<std::uint64_t>{}(std::bit_cast<std::uint64_t>(value)));
  if (op == Op::Variable) h = mix(h, std::hash<std::string>{}(node->name));
  if (lhs) h = mix(h, lhs->hash);
  if (rhs) h = mix(h, rhs->hash);
  node->hash = h;
  node->lhs = std::move(lhs);
  node->rhs = std::move(rhs);
  return ExprAccess::wrap(std::move(node));
}

const Expr& zero_constant() {
  static const Expr zero = make_node(Op::Constant, 0.0, {}, nullptr, nullptr);
  return zero;
}

bool is_integer(double v) { return std::isfinite(v) && std::floor(v) == v; }

// Folds op(a, b) to a constant when both children are constants and the
// result is finite; otherwise returns an empty optional-like null handle.
bool try_fold(Op op, const Expr& a, const Expr& b, double& out) {
  if (!a.is_constant()) return false;
  if (arity(op) == 2 && !b.is_constant()) return false;
  const double bv = arity(op) == 2 ? b.value() : 0.0;
  if (domain_violation(op, a.value(), bv)) return false;
  const double r = apply_numeric(op, a.value(), bv);
  if (!std::isfinite(r)) return false;
  out = r;
  return true;
}

Expr raw(Op op, const Expr& a, const Expr& b = Expr()) { return Expr::make(op, a, b); }

}  // namespace

std::size_t arity(Op op) noexcept {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
    case Op::Pow:
      return 2;
    default:
      return 1;
  }
}

std::string_view function_name(Op op) noexcept {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Tan: return "tan";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Tanh: return "tanh";
    default: return {};
  }
}

double apply_numeric(Op op, double a, double b) noexcept {
  switch (op) {
    case Op::Neg: return -a;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return b == 0.0 ? std::nan("") : a / b;
    case Op::Pow:
      if (b == 2.0) return a * a;
      return std::pow(a, b);
    case Op::Sin: return std::sin(a);
    case Op::Cos: return std::cos(a);
    case Op::Tan: return std::tan(a);
    case Op::Exp: return std::exp(a);
    case Op::Log: return a > 0.0 ? std::log(a) : std::nan("");
    case Op::Sqrt: return a >= 0.0 ? std::sqrt(a) : std::nan("");
    case Op::Tanh: return std::tanh(a);
    default: return std::nan("");
  }
}

bool domain_violation(Op op, double a, double b) noexcept {
  switch (op) {
    case Op::Div: return b == 0.0;
    case Op::Log: return !(a > 0.0);
    case Op::Sqrt: return a < 0.0;
    case Op::Pow: return (a < 0.0 && !is_integer(b)) || (a == 0.0 && b < 0.0);
    default: return false;
  }
}

// ---------------------------------------------------------------------------
// Expr handle

Expr::Expr() : node_(ExprAccess::node(zero_constant())) {}

Expr::Expr(double value) : Expr(constant(value)) {}

Expr Expr::constant(double value) {
  if (!std::isfinite(value)) throw std::invalid_argument("expression constants must be finite");
  if (value == 0.0) return zero_constant();  // also folds -0.0
  return make_node(Op::Constant, value, {}, nullptr, nullptr);
}

bool Expr::is_identifier(std::string_view name) noexcept { return valid_identifier(name); }

Expr Expr::variable(std::string_view name) {
  if (!valid_identifier(name)) {
    throw std::invalid_argument("invalid variable name '" + std::string(name) + "'");
  }
  return make_node(Op::Variable, 0.0, std::string(name), nullptr, nullptr);
}

Expr Expr::make(Op op, Expr lhs, Expr rhs) {
  if (op == Op::Constant || op == Op::Variable) {
    throw std::invalid_argument("Expr::make requires an operator node kind");
  }
  return make_node(op, 0.0, {}, std::move(lhs.node_), arity(op) == 2 ? std::move(rhs.node_) : nullptr);
}

Op Expr::op() const noexcept { return node_->op; }
double Expr::value() const noexcept { return node_->value; }
const std::string& Expr::name() const noexcept { return node_->name; }
Expr Expr::lhs() const { return node_->lhs ? Expr(node_->lhs) : Expr(); }
Expr Expr::rhs() const { return node_->rhs ? Expr(node_->rhs) : Expr(); }
std::size_t Expr::hash() const noexcept { return node_->hash; }

// ---------------------------------------------------------------------------
// Rewriting constructors

Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.op() == Op::Neg) return a.arg();
  return raw(Op::Neg, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  double folded = 0.0;
  if (try_fold(Op::Add, a, b, folded)) return Expr::constant(folded);
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (b.op() == Op::Neg) return a - b.arg();
  if (a.op() == Op::Neg) return b - a.arg();
  return raw(Op::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  double folded = 0.0;
  if (try_fold(Op::Sub, a, b, folded)) return Expr::constant(folded);
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  if (b.op() == Op::Neg) return a + b.arg();
  return raw(Op::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  double folded = 0.0;
  if (try_fold(Op::Mul, a, b, folded)) return Expr::constant(folded);
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr();
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant(-1.0)) return -b;
  if (b.is_constant(-1.0)) return -a;
  // Constants go first so that c1*(c2*x) can fold.
  if (b.is_constant() && !a.is_constant()) return b * a;
  if (a.is_constant() && b.op() == Op::Mul && b.lhs().is_constant()) {
    const double c = a.value() * b.lhs().value();
    if (std::isfinite(c)) return Expr::constant(c) * b.rhs();
  }
  if (a.op() == Op::Neg && b.op() == Op::Neg) return a.arg() * b.arg();
  if (a.op() == Op::Neg) return -(a.arg() * b);
  if (b.op() == Op::Neg) return -(a * b.arg());
  return raw(Op::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  double folded = 0.0;
  if (try_fold(Op::Div, a, b, folded)) return Expr::constant(folded);
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr();
  if (b.is_constant(1.0)) return a;
  if (b.is_constant(-1.0)) return -a;
  if (a.op() == Op::Neg) return -(a.arg() / b);
  return raw(Op::Div, a, b);
}

Expr pow(const Expr& base, const Expr& exponent) {
  double folded = 0.0;
  if (try_fold(Op::Pow, base, exponent, folded)) return Expr::constant(folded);
  if (exponent.is_constant(1.0)) return base;
  if (exponent.is_constant(0.0)) return Expr::constant(1.0);
  if (base.is_constant(1.0)) return Expr::constant(1.0);
  if (base.is_constant(0.0) && exponent.is_constant() && exponent.value() > 0.0) return Expr();
  return raw(Op::Pow, base, exponent);
}

namespace {
Expr unary(Op op, const Expr& a) {
  double folded = 0.0;
  if (try_fold(op, a, Expr(), folded)) return Expr::constant(folded);
  return raw(op, a);
}
}  // namespace

Expr sin(const Expr& a) { return unary(Op::Sin, a); }
Expr cos(const Expr& a) { return unary(Op::Cos, a); }
Expr tan(const Expr& a) { return unary(Op::Tan, a); }
Expr exp(const Expr& a) { return unary(Op::Exp, a); }
Expr log(const Expr& a) { return unary(Op::Log, a); }
Expr sqrt(const Expr& a) { return unary(Op::Sqrt, a); }
Expr tanh(const Expr& a) { return unary(Op::Tanh, a); }

Expr apply(Op op, const Expr& lhs, const Expr& rhs) {
  switch (op) {
    case Op::Neg: return -lhs;
    case Op::Add: return lhs + rhs;
    case Op::Sub: return lhs - rhs;
    case Op::Mul: return lhs * rhs;
    case Op::Div: return lhs / rhs;
    case Op::Pow: return pow(lhs, rhs);
    case Op::Sin:
    case Op::Cos:
    case Op::Tan:
    case Op::Exp:
    case Op::Log:
    case Op::Sqrt:
    case Op::Tanh:
      return unary(op, lhs);
    case Op::Constant:
    case Op::Variable:
      break;
  }
  throw std::invalid_argument("apply() requires an operator node kind");
}

// ---------------------------------------------------------------------------
// simplify

namespace {

class Simplifier {
 public:
  Expr run(const Expr& e) {
    if (arity(e.op()) == 0) return e;
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    const Expr l = run(e.lhs());
    const Expr r = arity(e.op()) == 2 ? run(e.rhs()) : Expr();
    Expr out = apply(e.op(), l, r);
    if (out.op() == e.op() && arity(out.op()) > 0 && out.lhs().id() == e.lhs().id() &&
        (arity(out.op()) == 1 || out.rhs().id() == e.rhs().id())) {
      out = e;
    }
    keep_.push_back(e);
    memo_.emplace(e.id(), out);
    return out;
  }

 private:
  std::unordered_map<const ExprNode*, Expr> memo_;
  std::vector<Expr> keep_;
};

}  // namespace

Expr simplify(const Expr& e) {
  Expr current = e;
  for (;;) {
    Expr next = Simplifier{}.run(current);
    if (next.id() == current.id()) return next;
    current = next;
  }
}

// ---------------------------------------------------------------------------
// dependency queries

namespace {

class DependencyCache {
 public:
  explicit DependencyCache(std::string_view var) : var_(var) {}

  bool depends(const Expr& e) {
    if (e.op() == Op::Constant) return false;
    if (e.op() == Op::Variable) return e.name() == var_;
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    bool d = depends(e.lhs());
    if (!d && arity(e.op()) == 2) d = depends(e.rhs());
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  std::string_view var_;
  std::unordered_map<const ExprNode*, bool> memo_;
};

class Differentiator {
 public:
  explicit Differentiator(std::string_view var) : var_(var), deps_(var) {}

  Expr run(const Expr& e) {
    if (!deps_.depends(e)) return Expr();
    if (e.op() == Op::Variable) return Expr::constant(1.0);
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    Expr d = rule(e);
    keep_.push_back(e);
    memo_.emplace(e.id(), d);
    return d;
  }

 private:
  Expr rule(const Expr& e) {
    const Expr a = e.lhs();
    switch (e.op()) {
      case Op::Neg: return -run(a);
      case Op::Add: return run(a) + run(e.rhs());
      case Op::Sub: return run(a) - run(e.rhs());
      case Op::Mul: {
        const Expr b = e.rhs();
        return run(a) * b + a * run(b);
      }
      case Op::Div: {
        const Expr b = e.rhs();
        const Expr da = run(a);
        const Expr db = run(b);
        if (db.is_constant(0.0)) return da / b;
        return da / b - (a * db) / (b * b);
      }
      case Op::Pow: {
        const Expr b = e.rhs();
        if (!deps_.depends(b)) {
          return b * pow(a, b - Expr::constant(1.0)) * run(a);
        }
        if (!deps_.depends(a)) return e * log(a) * run(b);
        return e * (run(b) * log(a) + b * run(a) / a);
      }
      case Op::Sin: return cos(a) * run(a);
      case Op::Cos: return -(sin(a) * run(a));
      case Op::Tan: {
        const Expr c = cos(a);
        return run(a) / (c * c);
      }
      case Op::Exp: return e * run(a);
      case Op::Log: return run(a) / a;
      case Op::Sqrt: return run(a) / (Expr::constant(2.0) * e);
      case Op::Tanh: return (Expr::constant(1.0) - e * e) * run(a);
      case Op::Constant:
      case Op::Variable:
        break;
    }
    return Expr();
  }

  std::string_view var_;
  DependencyCache deps_;
  std::unordered_map<const ExprNode*, Expr> memo_;
  std::vector<Expr> keep_;
};

}  // namespace

Expr differentiate(const Expr& e, std::string_view var) { return Differentiator(var).run(e); }

bool depends_on(const Expr& e, std::string_view var) { return DependencyCache(var).depends(e); }

std::set<std::string> free_variables(const Expr& e) {
  std::set<std::string> out;
  std::unordered_map<const ExprNode*, bool> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    if (n.op() == Op::Constant) return;
    if (n.op() == Op::Variable) {
      out.insert(n.name());
      return;
    }
    if (!seen.emplace(n.id(), true).second) return;
    walk(n.lhs());
    if (arity(n.op()) == 2) walk(n.rhs());
  };
  walk(e);
  return out;
}

std::size_t node_count(const Expr& e) {
  std::unordered_map<const ExprNode*, bool> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& n) {
    if (!seen.emplace(n.id(), true).second) return;
    if (arity(n.op()) >= 1) walk(n.lhs());
    if (arity(n.op()) == 2) walk(n.rhs());
  };
  walk(e);
  return seen.size();
}

Expr substitute(const Expr& e, const std::map<std::string, Expr, std::less<>>& replacements) {
  std::unordered_map<const ExprNode*, Expr> memo;
  std::vector<Expr> keep;
  std::function<Expr(const Expr&)> walk = [&](const Expr& n) -> Expr {
    if (n.op() == Op::Constant) return n;
    if (n.op() == Op::Variable) {
      auto it = replacements.find(n.name());
      return it == replacements.end() ? n : it->second;
    }
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    Expr out = apply(n.op(), walk(n.lhs()), arity(n.op()) == 2 ? walk(n.rhs()) : Expr());
    keep.push_back(n);
    memo.emplace(n.id(), out);
    return out;
  };
  return walk(e);
}

// ---------------------------------------------------------------------------
// evaluation

double evaluate(const Expr& e, const Binding& binding) {
  std::unordered_map<const ExprNode*, double> memo;
  std::function<double(const Expr&)> walk = [&](const Expr& n) -> double {
    switch (n.op()) {
      case Op::Constant: return n.value();
      case Op::Variable: {
        auto it = binding.find(n.name());
        if (it == binding.end()) throw UnboundVariable(n.name());
        return it->second;
      }
      default: break;
    }
    if (auto it = memo.find(n.id()); it != memo.end()) return it->second;
    const double a = walk(n.lhs());
    const double b = arity(n.op()) == 2 ? walk(n.rhs()) : 0.0;
    if (domain_violation(n.op(), a, b)) throw DomainError("domain error", to_string(n));
    const double r = apply_numeric(n.op(), a, b);
    if (!std::isfinite(r)) throw DomainError("non-finite result", to_string(n));
    memo.emplace(n.id(), r);
    return r;
  };
  return walk(e);
}

// ---------------------------------------------------------------------------
// printing

namespace {

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Constant:
      return e.value() < 0.0 ? 3 : 5;
    default:
      return 5;
  }
}

void print(const Expr& e, std::string& out) {
  auto child = [&out](const Expr& c, bool parens) {
    if (parens) out += '(';
    print(c, out);
    if (parens) out += ')';
  };
  switch (e.op()) {
    case Op::Constant: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.value());
      out += buf;
      return;
    }
    case Op::Variable:
      out += e.name();
      return;
    case Op::Neg:
      out += '-';
      child(e.arg(), precedence(e.arg()) <= 3);
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      child(e.lhs(), precedence(e.lhs()) < p);
      switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += "*"; break;
        default: out += "/"; break;
      }
      child(e.rhs(), precedence(e.rhs()) <= p);
      return;
    }
    case Op::Pow:
      child(e.lhs(), precedence(e.lhs()) <= 4);
      out += '^';
      child(e.rhs(), precedence(e.rhs()) < 5);
      return;
    default:
      out += function_name(e.op());
      out += '(';
      print(e.arg(), out);
      out += ')';
      return;
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

}  // namespace pcbf
