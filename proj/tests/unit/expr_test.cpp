#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "numeric.hpp"
#include "pcbf/expr.hpp"
#include "pcbf/expr_linalg.hpp"
#include "pcbf/parser.hpp"
#include "pcbf/program.hpp"

namespace pcbf {
namespace {

using testing::numeric_partial;
using testing::relative_error;
using testing::uniform;

constexpr double kPi = std::numbers::pi;

struct Case {
  const char* source;
  double expected;
};

// x = 2, y = -0.5, t = 0.3, z = 1.5
const Binding kPoint{{"x", 2.0}, {"y", -0.5}, {"t", 0.3}, {"z", 1.5}};

const std::vector<Case>& corpus() {
  static const std::vector<Case> cases{
      {"1", 1.0},
      {"2.5e-3", 2.5e-3},
      {"1e2", 100.0},
      {".5", 0.5},
      {"x", 2.0},
      {"-x", -2.0},
      {"-(3)", -3.0},
      {"--x", 2.0},
      {"+x", 2.0},
      {"x + y", 1.5},
      {"x - y", 2.5},
      {"x * y", -1.0},
      {"x / y", -4.0},
      {"x ^ 3", 8.0},
      {"2 ^ 3 ^ 2", 512.0},
      {"(2 ^ 3) ^ 2", 64.0},
      {"-2 ^ 2", -4.0},
      {"(-2) ^ 2", 4.0},
      {"2 ^ -1", 0.5},
      {"x ^ -2", 0.25},
      {"1 - 2 - 3", -4.0},
      {"24 / 4 / 3", 2.0},
      {"2 + 3 * 4", 14.0},
      {"(2 + 3) * 4", 20.0},
      {"x^2 + sin(t)", 4.0 + std::sin(0.3)},
      {"sin(0)", 0.0},
      {"cos(0)", 1.0},
      {"exp(0)", 1.0},
      {"log(1)", 0.0},
      {"sqrt(16)", 4.0},
      {"tan(t)", std::tan(0.3)},
      {"tanh(y)", std::tanh(-0.5)},
      {"pow(x, 0.5)", std::sqrt(2.0)},
      {"pow(z, y)", std::pow(1.5, -0.5)},
      {"pi", kPi},
      {"(pi^2)/81", kPi * kPi / 81.0},
      {"pi^2/81 - x^2", kPi * kPi / 81.0 - 4.0},
      {"sin(x)^2 + cos(x)^2", 1.0},
      {"exp(log(z))", 1.5},
      {"log(exp(y))", -0.5},
      {"sqrt(x^2 + z^2)", std::sqrt(6.25)},
      {"x*y*z*t", 2.0 * -0.5 * 1.5 * 0.3},
      {"x / (1 + y^2)", 2.0 / 1.25},
      {"30*sin(0.02*t)", 30.0 * std::sin(0.006)},
      {"sin(t) + 0.2*sin(2*t) - 0.5*cos(5*t) + cos(3*t)",
       std::sin(0.3) + 0.2 * std::sin(0.6) - 0.5 * std::cos(1.5) + std::cos(0.9)},
      {"0.8*exp(-10*t) + 0.05", 0.8 * std::exp(-3.0) + 0.05},
      {"1 - exp(z/(z - 2))", 1.0 - std::exp(1.5 / -0.5)},
      {"exp(-1)/0.25", std::exp(-1.0) / 0.25},
      {"-y^2", -0.25},
      {"(-y)^2", 0.25},
      {"2*-x", -4.0},
      {"x^y", std::pow(2.0, -0.5)},
      {"cos(pi)", -1.0},
      {"sin(pi/2)", 1.0},
      {"tanh(0)", 0.0},
      {"x*(y + z) - (x*y + x*z)", 0.0},
      {"((x))", 2.0},
      {"  x\t+\ny ", 1.5},
      {"sqrt(z)*sqrt(z)", 1.5},
      {"exp(x)*exp(-x)", 1.0},
      {"1/(1/x)", 2.0},
  };
  return cases;
}

TEST(ExprParse, CorpusEvaluatesToReferenceValues) {
  std::size_t checked = 0;
  for (const auto& c : corpus()) {
    const std::string src = c.source;
    const double v = evaluate(parse(src), kPoint);
    EXPECT_NEAR(v, c.expected, 1e-12 * std::max(1.0, std::abs(c.expected))) << src;
    ++checked;
  }
  EXPECT_GE(checked, 50u);
}

TEST(ExprParse, PlantStyleExpressionsWithParameters) {
  Binding b{{"x", 0.2}, {"z", 1.5}, {"B", 0.016}, {"N", 0.04}, {"M", 0.064}};
  EXPECT_NEAR(evaluate(parse("-(B*z + N*sin(x))/M"), b), -(0.016 * 1.5 + 0.04 * std::sin(0.2)) / 0.064, 1e-12);
  Binding s{{"r", 0.1}, {"T", 31.0}, {"a", 0.4}};
  EXPECT_NEAR(evaluate(parse("-r/T - a*r^3/T"), s), -0.1 / 31.0 - 0.4 * 0.001 / 31.0, 1e-15);
}

TEST(ExprParse, PowerIsRightAssociativeAndBindsTighterThanUnaryMinus) {
  EXPECT_DOUBLE_EQ(evaluate(parse("2^3^2"), {}), 512.0);
  EXPECT_DOUBLE_EQ(evaluate(parse("-3^2"), {}), -9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse("2^-2"), {}), 0.25);
}

TEST(ExprParse, SyntaxErrorReportsOffsetAndExpectedTokens) {
  try {
    parse("x + * 2");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 4u);
    EXPECT_FALSE(e.expected().empty());
  }
  try {
    parse("(x + 1");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 6u);
    bool wants_paren = false;
    for (const auto& tok : e.expected()) wants_paren |= tok.find(')') != std::string::npos;
    EXPECT_TRUE(wants_paren);
  }
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("x y"), ParseError);
  EXPECT_THROW(parse("3 $ 4"), ParseError);
  EXPECT_THROW(parse("sin()"), ParseError);
  EXPECT_THROW(parse("pow(x)"), ParseError);
}

TEST(ExprParse, UnknownFunctionIsRejected) {
  try {
    parse("abs(x)");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("abs"), std::string::npos);
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(ExprEvaluate, UnboundVariableIsNamed) {
  try {
    evaluate(parse("x + q"), {{"x", 1.0}});
    FAIL();
  } catch (const UnboundVariable& e) {
    EXPECT_EQ(e.variable(), "q");
  }
}

TEST(ExprEvaluate, DomainErrorsNameTheSubexpression) {
  try {
    evaluate(parse("1 + log(x)"), {{"x", -1.0}});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(e.subexpression().find("log"), std::string::npos);
  }
  EXPECT_THROW(evaluate(parse("1/x"), {{"x", 0.0}}), DomainError);
  EXPECT_THROW(evaluate(parse("sqrt(x)"), {{"x", -4.0}}), DomainError);
}

TEST(ExprEvaluate, SpotValues) {
  EXPECT_DOUBLE_EQ(evaluate(parse("x^2"), {{"x", 3.0}}), 9.0);
  EXPECT_DOUBLE_EQ(evaluate(parse("exp(0)"), {}), 1.0);
  EXPECT_NEAR(evaluate(parse("(pi^2)/81"), {}), 0.12184696791468343, 1e-16);
}

TEST(ExprEvaluate, BarrierOneClosedFormArithmetic) {
  // b_1 = mu1 y1 / xi - y1^2 / (2 beta xi^2) + lambda y0 - beta rho^2 / 2
  const Expr b1 = parse("mu1*y1/xi - y1^2/(2*beta*xi^2) + lambda*y0 - beta/2*rho^2");
  const double xi = kPi * kPi / 81.0;
  Binding b{{"mu1", 0.1}, {"y1", 0.5}, {"y0", 0.3}, {"xi", xi}, {"beta", 20.0}, {"lambda", 6.0}, {"rho", 0.02}};
  const double expected = 0.1 * 0.5 / xi - 0.25 / (2 * 20 * xi * xi) + 6 * 0.3 - 10 * 0.0004;
  EXPECT_NEAR(evaluate(b1, b), expected, 1e-13);
}

TEST(ExprConstruct, RejectsNonFiniteConstantsAndBadIdentifiers) {
  EXPECT_THROW(Expr::constant(std::nan("")), std::invalid_argument);
  EXPECT_THROW(Expr::constant(INFINITY), std::invalid_argument);
  EXPECT_THROW(Expr::variable("1x"), std::invalid_argument);
  EXPECT_THROW(Expr::variable(""), std::invalid_argument);
  EXPECT_NO_THROW(Expr::variable("_a1"));
}

TEST(ExprDifferentiate, TextbookExamples) {
  const Binding b{{"x", 0.7}, {"y", -1.3}};
  EXPECT_DOUBLE_EQ(evaluate(differentiate(parse("x*y"), "x"), b), -1.3);
  EXPECT_NEAR(evaluate(differentiate(parse("sin(x^2)"), "x"), b), 2 * 0.7 * std::cos(0.49), 1e-15);
  EXPECT_TRUE(differentiate(parse("y^3 + sin(y)"), "x").is_constant(0.0));
  EXPECT_NEAR(evaluate(differentiate(parse("x^y"), "y"), b), std::pow(0.7, -1.3) * std::log(0.7), 1e-14);
  EXPECT_NEAR(evaluate(differentiate(parse("tan(x)"), "x"), b), 1.0 / std::pow(std::cos(0.7), 2), 1e-14);
  EXPECT_NEAR(evaluate(differentiate(parse("tanh(x)"), "x"), b), 1.0 - std::pow(std::tanh(0.7), 2), 1e-15);
  EXPECT_NEAR(evaluate(differentiate(parse("sqrt(x)"), "x"), b), 0.5 / std::sqrt(0.7), 1e-15);
  EXPECT_NEAR(evaluate(differentiate(parse("log(x)"), "x"), b), 1.0 / 0.7, 1e-15);
}

TEST(ExprDifferentiate, DerivativeIsSimplified) {
  const Expr d = differentiate(parse("x*y"), "x");
  ASSERT_TRUE(d.is_variable());
  EXPECT_EQ(d.name(), "y");
  EXPECT_TRUE(differentiate(parse("3*x"), "x").is_constant(3.0));
}

TEST(ExprDifferentiate, ShipBarrierOneMatchesFiniteDifference) {
  const double xi = kPi * kPi / 81.0;
  const std::string h = "(pi^2/81 - x^2)";
  const std::string tau = "(" + h + "/" + std::to_string(xi) + ")";
  // y0 = chi(tau), y1 = chi'(tau) written out for tau < 1.
  const std::string y0 = "(1 - exp(" + tau + "/(" + tau + " - 1)))";
  const std::string y1 = "(exp(" + tau + "/(" + tau + " - 1))/(" + tau + " - 1)^2)";
  const Expr b1 = parse("(-2*x*mu1)*" + y1 + "/xi - (2*x)^2*" + y1 + "^2/(2*20*xi^2) + 6*" + y0 +
                        " - 10*0.02^2");
  Binding at{{"x", 0.1}, {"mu1", 0.05}, {"xi", xi}};
  const double symbolic = evaluate(differentiate(b1, "x"), at);
  const double fd = numeric_partial(b1, at, "x", 1e-6);
  EXPECT_LE(relative_error(symbolic, fd), 1e-8);
}

// Random expressions over the full grammar, kept inside every function's
// domain by construction.
class ExprGenerator {
 public:
  explicit ExprGenerator(std::uint64_t seed) : rng_(seed) {}

  std::string operator()(int depth) {
    if (depth == 0 || pick(4) == 0) return leaf();
    switch (pick(12)) {
      case 0: return "(" + (*this)(depth - 1) + " + " + (*this)(depth - 1) + ")";
      case 1: return "(" + (*this)(depth - 1) + " - " + (*this)(depth - 1) + ")";
      case 2: return "(" + (*this)(depth - 1) + " * " + (*this)(depth - 1) + ")";
      case 3: return "(" + (*this)(depth - 1) + " / (2 + sin(" + (*this)(depth - 1) + ")))";
      case 4: return "(" + (*this)(depth - 1) + ")^" + std::to_string(1 + pick(3));
      case 5: return "sin(" + (*this)(depth - 1) + ")";
      case 6: return "cos(" + (*this)(depth - 1) + ")";
      case 7: return "tanh(" + (*this)(depth - 1) + ")";
      case 8: return "exp(tanh(" + (*this)(depth - 1) + "))";
      case 9: return "log(1 + (" + (*this)(depth - 1) + ")^2)";
      case 10: return "sqrt(2 + cos(" + (*this)(depth - 1) + "))";
      default: return "pow(1.5 + tanh(" + (*this)(depth - 1) + "), " + (*this)(depth - 1) + ")";
    }
  }

  Binding point() {
    return {{"x", uniform(rng_, -1.5, 1.5)}, {"y", uniform(rng_, -1.5, 1.5)}, {"z", uniform(rng_, -1.5, 1.5)}};
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::string leaf() {
    static const char* vars[] = {"x", "y", "z"};
    if (pick(3) == 0) return std::to_string(uniform(rng_, -2.0, 2.0));
    return vars[pick(3)];
  }
  std::mt19937_64 rng_;
};

TEST(ExprProperty, DerivativesMatchCentralDifferences) {
  ExprGenerator gen(7);
  std::mt19937_64 rng(11);
  const char* vars[] = {"x", "y", "z"};
  for (int i = 0; i < 1000; ++i) {
    const std::string src = gen(4);
    const Expr e = parse(src);
    const Binding at = gen.point();
    const std::string v = vars[i % 3];
    const double symbolic = evaluate(differentiate(e, v), at);
    Binding lo = at, hi = at;
    lo[v] -= 1e-6;
    hi[v] += 1e-6;
    const double fd = (evaluate(e, hi) - evaluate(e, lo)) / 2e-6;
    ASSERT_LE(std::abs(symbolic - fd), 1e-5 * (1 + std::abs(symbolic))) << src << " d/d" << v;
  }
}

TEST(ExprProperty, SimplifyPreservesValues) {
  ExprGenerator gen(21);
  for (int i = 0; i < 1000; ++i) {
    const std::string src = gen(4) + " * 1 + 0 * " + gen(2) + " + (" + gen(3) + ")^1";
    const Expr raw = parse(src);
    const Expr s = simplify(raw);
    const Binding at = gen.point();
    const double a = evaluate(raw, at);
    ASSERT_LE(std::abs(evaluate(s, at) - a), 1e-12 * std::max(1.0, std::abs(a))) << src;
  }
}

TEST(ExprProperty, MixedPartialsCommute) {
  ExprGenerator gen(33);
  for (int i = 0; i < 300; ++i) {
    const Expr e = parse(gen(3));
    const Binding at = gen.point();
    const double xy = evaluate(differentiate(differentiate(e, "x"), "y"), at);
    const double yx = evaluate(differentiate(differentiate(e, "y"), "x"), at);
    ASSERT_LE(std::abs(xy - yx), 1e-9 * std::max(1.0, std::abs(xy))) << to_string(e);
  }
}

TEST(ExprProperty, PrintedFormParsesBackToTheSameFunction) {
  ExprGenerator gen(45);
  for (int i = 0; i < 300; ++i) {
    const Expr e = parse(gen(4));
    const Expr back = parse(to_string(e));
    const Binding at = gen.point();
    const double a = evaluate(e, at);
    ASSERT_NEAR(evaluate(back, at), a, 1e-12 * std::max(1.0, std::abs(a))) << to_string(e);
  }
}

TEST(ExprProperty, CompiledProgramMatchesTreeEvaluation) {
  ExprGenerator gen(57);
  std::vector<Expr> outs;
  for (int i = 0; i < 40; ++i) outs.push_back(parse(gen(4)));
  const Program prog(outs, {"x", "y", "z"});
  for (int k = 0; k < 50; ++k) {
    const Binding at = gen.point();
    const std::vector<double> in{at.at("x"), at.at("y"), at.at("z")};
    const auto got = prog(in);
    for (std::size_t i = 0; i < outs.size(); ++i) {
      const double want = evaluate(outs[i], at);
      ASSERT_NEAR(got[i], want, 1e-12 * std::max(1.0, std::abs(want)));
    }
  }
}

TEST(ExprSimplify, RewriteExamples) {
  const Expr a = simplify(parse("(x*0)+(y*1)"));
  ASSERT_TRUE(a.is_variable());
  EXPECT_EQ(a.name(), "y");
  EXPECT_TRUE(simplify(parse("2+3*4")).is_constant(14.0));
  const Expr c = simplify(parse("((x+0)^1)*1"));
  ASSERT_TRUE(c.is_variable());
  EXPECT_EQ(c.name(), "x");
}

TEST(ExprSimplify, ParseIsVerbatim) {
  const Expr raw = parse("x*1");
  EXPECT_EQ(raw.op(), Op::Mul);
  EXPECT_TRUE(simplify(raw).is_variable());
}

TEST(ExprQueries, FreeVariablesAndDependence) {
  const Expr e = parse("x*sin(t) + y^2");
  EXPECT_EQ(free_variables(e), (std::set<std::string>{"t", "x", "y"}));
  EXPECT_TRUE(depends_on(e, "t"));
  EXPECT_FALSE(depends_on(e, "z"));
}

TEST(ExprQueries, SubstituteReplacesVariables) {
  const Expr e = substitute(parse("x^2 + y"), {{"x", parse("2*t")}});
  EXPECT_DOUBLE_EQ(evaluate(e, {{"t", 1.5}, {"y", 1.0}}), 10.0);
}

TEST(ExprQueries, SharedSubtreesAreCountedOnce) {
  const Expr a = parse("sin(x) + cos(y)");
  const Expr twice = a * a;
  EXPECT_LT(node_count(twice), 2 * node_count(a) + 1);
}

TEST(ExprLinalg, RightInverseOfWideMatrix) {
  ExprMat g(1, 2);
  g(0, 0) = parse("x");
  g(0, 1) = parse("1");
  const ExprMat gi = right_inverse(g);
  const ExprMat prod = g * gi;
  EXPECT_NEAR(evaluate(prod(0, 0), {{"x", 0.4}}), 1.0, 1e-15);
}

TEST(ExprLinalg, InverseOfThreeByThree) {
  ExprMat m(3, 3);
  const char* entries[] = {"2", "x", "0", "1", "3", "y", "0", "1", "4"};
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = parse(entries[i]);
  const ExprMat prod = m * inverse(m);
  const Binding at{{"x", 0.5}, {"y", -1.0}};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) EXPECT_NEAR(evaluate(prod(r, c), at), r == c ? 1.0 : 0.0, 1e-14);
}

}  // namespace
}  // namespace pcbf
