// Proxy barrier recursion: the stack b_0..b_m built on the proxy subsystem
//
//   dx/dt = f0(x) + g0(x) mu_1 + g0(x) e,  dmu_i/dt = mu_{i+1},  dmu_m/dt = nu,
//
// with ||e(t)|| <= rho(t), together with the affine constraint
// psi0 + psi1 nu >= 0 on the virtual input and the three feasibility
// conditions that make that constraint always satisfiable.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcbf/expr.hpp"
#include "pcbf/expr_linalg.hpp"
#include "pcbf/program.hpp"

namespace pcbf {

/// rho(t) = (initial - steady) exp(-decay t) + steady. A constant bound has
/// initial == steady and decay == 0.
struct RhoSpec {
  double initial = 1.0;
  double steady = 1.0;
  double decay = 0.0;

  static RhoSpec constant(double value) { return {value, value, 0.0}; }

  /// Throws SpecError unless initial >= steady > 0 and decay >= 0.
  void validate() const;
  double operator()(double t) const;
  double derivative(double t) const;
  Expr expr(const Expr& t) const;
  bool operator==(const RhoSpec&) const = default;
};

enum class BarrierMode {
  Switched,  // y_j = chi^(j)(h / xi)
  Plain,     // y_0 -> h, y_j -> 0; for safe sets where L_g0 h never vanishes
};

struct ProxySpec {
  std::vector<std::string> state_names;  // x_1..x_p
  std::size_t input_dim = 1;             // p1
  std::size_t chain_length = 1;          // m
  ExprVec drift;                         // f0, length p
  ExprMat input_gain;                    // g0, p x p1
  Expr safety;                           // h
  double xi = 1.0;
  std::vector<double> lambda;  // lambda_1..lambda_{m+1}
  std::vector<double> beta;    // beta_1..beta_m
  BarrierMode mode = BarrierMode::Switched;

  std::size_t state_dim() const noexcept { return state_names.size(); }
  /// Checks dimensions, positivity of gains and that f0, g0, h only use the
  /// declared state variables.
  void validate() const;
};

/// Variable naming shared by the barrier stack and the controllers.
namespace symbols {
inline constexpr const char* kTime = "t";
/// mu1, mu2, ... for scalar virtual states; mu1_1, mu1_2, ... otherwise.
std::string virtual_state(std::size_t level, std::size_t component, std::size_t dim);
std::vector<std::string> virtual_states(std::size_t level, std::size_t dim);
/// y0, y1, ...
std::string switch_output(std::size_t order);
/// True for names the library reserves (t, nu*, mu*, y<k>, ...).
bool is_reserved(std::string_view name);
}  // namespace symbols

/// k-th derivative of the switch function chi(tau) = 1 - exp(tau / (tau - 1))
/// for tau < 1 and chi = 1 for tau >= 1. Supports k <= 8.
double chi(double tau, std::size_t order);
/// [chi(tau), chi'(tau), ..., chi^(max_order)(tau)].
std::vector<double> chi_derivatives(double tau, std::size_t max_order);

struct ConstraintValue {
  double psi0 = 0.0;
  std::vector<double> psi1;
  std::vector<double> barriers;  // b_0..b_m
  double h = 0.0;
};

class BarrierStack {
 public:
  static BarrierStack build(ProxySpec proxy, RhoSpec rho);

  const ProxySpec& proxy() const noexcept { return proxy_; }
  const RhoSpec& rho() const noexcept { return rho_; }
  std::size_t chain_length() const noexcept { return proxy_.chain_length; }

  /// b_i for i = 0..m.
  const Expr& barrier(std::size_t i) const { return barriers_.at(i); }
  /// M_i for i = 1..m+1, a row vector of length p.
  const ExprVec& modulator(std::size_t i) const { return modulators_.at(i - 1); }
  const Expr& psi0() const noexcept { return psi0_; }
  const ExprVec& psi1() const noexcept { return psi1_; }
  /// Directional derivative of h along g0 (length p1).
  const ExprVec& lie_gain() const noexcept { return lie_gain_; }

  /// Variables the stack expressions may reference: x, mu_1..mu_m,
  /// y_0..y_{m+1} (switched mode only) and t.
  const std::vector<std::string>& variables() const noexcept { return variables_; }

  /// Binds y_j from h(x) and evaluates psi0, psi1, b_0..b_m. `mu` holds
  /// mu_1..mu_m flattened (m * p1 entries).
  ConstraintValue eval_constraint(std::span<const double> x, std::span<const double> mu, double t) const;

  /// Full input vector in the order of variables().
  std::vector<double> bind(std::span<const double> x, std::span<const double> mu, double t) const;
  /// Evaluates an expression over variables() at a state.
  double evaluate_at(const Expr& e, std::span<const double> x, std::span<const double> mu, double t) const;

 private:
  ProxySpec proxy_;
  RhoSpec rho_;
  std::vector<Expr> barriers_;
  std::vector<ExprVec> modulators_;
  Expr psi0_;
  ExprVec psi1_;
  ExprVec lie_gain_;
  std::vector<std::string> variables_;
  Program program_;         // psi0, psi1..., b_0..b_m
  Program safety_program_;  // h
};

enum class Verdict { Pass, InconclusivePass, Fail, Skipped };
const char* to_string(Verdict v) noexcept;
inline bool accepted(Verdict v) noexcept { return v != Verdict::Fail; }

struct SamplerBox {
  std::vector<double> lower;
  std::vector<double> upper;
  std::size_t samples = 20001;
  std::uint64_t seed = 1;
  double gain_tolerance = 1e-8;
};

struct ConditionOneResult {
  Verdict verdict = Verdict::Skipped;
  std::size_t samples = 0;       // samples inside the safe set
  std::size_t degenerate = 0;    // ... of which had ||L_g0 h|| <= tolerance
  double min_gain_norm = 0.0;    // smallest ||L_g0 h|| seen inside the safe set
  std::optional<std::vector<double>> counterexample;
};

struct ConditionTwoResult {
  Verdict verdict = Verdict::Skipped;
  double supremum = 0.0;  // sup_t of the weighted operator sum
  double bound = 0.0;     // product of lambda_1..lambda_{m+1}
  double margin = 0.0;    // bound - supremum
};

struct ConditionThreeResult {
  Verdict verdict = Verdict::Fail;
  double y0 = 0.0;
  std::vector<double> barriers;  // b_1..b_m at t = 0
};

struct ConditionReport {
  ConditionOneResult one;
  ConditionTwoResult two;
  ConditionThreeResult three;
  bool passed() const noexcept {
    return accepted(one.verdict) && accepted(two.verdict) && accepted(three.verdict);
  }
};

/// Coefficients of a + b exp(-r t) + c exp(-2 r t).
struct DecayingSum {
  double constant = 0.0;
  double slow = 0.0;  // exp(-r t)
  double fast = 0.0;  // exp(-2 r t)
  double rate = 0.0;  // r
  double operator()(double t) const;
  /// Exact supremum over t >= 0.
  double supremum() const;
};

/// sum_{j=2}^{m+1} beta_{j-1}/2 (d/dt + lambda_j) o ... o (d/dt + lambda_{m+1}) rho(t)^2
/// expanded in closed form.
DecayingSum condition_two_operator(const ProxySpec& proxy, const RhoSpec& rho);
ConditionTwoResult check_condition_two(const ProxySpec& proxy, const RhoSpec& rho);
ConditionOneResult check_condition_one(const BarrierStack& stack, const SamplerBox& box);
/// `mu0` holds mu_1(0)..mu_m(0) flattened.
ConditionThreeResult check_condition_three(const BarrierStack& stack, std::span<const double> x0,
                                           std::span<const double> mu0);
ConditionReport check_conditions(const BarrierStack& stack, std::span<const double> x0,
                                 std::span<const double> mu0, const SamplerBox& box);

}  // namespace pcbf
