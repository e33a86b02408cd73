// Tracking and nominal control laws.
//
//   NominalController         backstepping for the proxy subsystem; its
//                             output is the nominal virtual input nu_d.
//   PpcController             approximation-free prescribed performance
//                             control of the virtual tracking error.
//   NussbaumController        adaptive control with unknown input gain sign.
//   DobBacksteppingController backstepping driven by filtered disturbance
//                             estimates.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcbf/barrier.hpp"
#include "pcbf/dob.hpp"
#include "pcbf/expr_linalg.hpp"
#include "pcbf/plant.hpp"
#include "pcbf/program.hpp"

namespace pcbf {

namespace symbols {
/// nu, or nu_1, nu_2, ... for a vector virtual input.
std::string virtual_input(std::size_t component, std::size_t dim);
/// dhat1, dhat1_2, ... (raw observer output of a level, 1-based).
std::string estimate(std::size_t level, std::size_t component, std::size_t dim);
/// dhatf1_1, dhatf1_1_2, ... (filter stage >= 1 of a level).
std::string filtered_estimate(std::size_t level, std::size_t stage, std::size_t component, std::size_t dim);
}  // namespace symbols

/// A partial derivative the controller construction actually used; kept so
/// that it can be checked against finite differences.
struct SymbolicPartial {
  std::string label;
  Expr function;
  std::string variable;
  Expr derivative;
};

// ---------------------------------------------------------------------------

struct NominalGains {
  std::vector<double> k;  // k_0..k_m
  std::vector<double> c;  // c_0..c_m
  ExprVec reference;      // x_d(t), one entry per proxy state
  void validate(std::size_t chain_length, std::size_t state_dim) const;
};

class NominalController {
 public:
  static NominalController build(const ProxySpec& proxy, NominalGains gains);

  /// nu_d = alpha_{m+1}. `mu` holds mu_1..mu_m flattened. Throws
  /// DomainError when g0 is numerically singular at x.
  std::vector<double> evaluate(std::span<const double> x, std::span<const double> mu, double t) const;

  /// alpha_i for i = 1..m+1.
  const ExprVec& alpha(std::size_t i) const { return alpha_.at(i - 1); }
  /// Tracking error x - x_d as an expression in x and t.
  const ExprVec& tracking_error() const noexcept { return eps0_; }
  const std::vector<SymbolicPartial>& partials() const noexcept { return partials_; }
  /// x names, mu_1..mu_m components, t.
  const std::vector<std::string>& variables() const noexcept { return variables_; }

 private:
  std::size_t p_ = 0, p1_ = 0;
  std::vector<ExprVec> alpha_;
  ExprVec eps0_;
  std::vector<SymbolicPartial> partials_;
  std::vector<std::string> variables_;
  Program program_;  // alpha_{m+1}, then g0 entries
};

// ---------------------------------------------------------------------------

struct PpcGains {
  std::vector<double> k;        // k_1..k_n
  std::vector<int> sign;        // declared sign of g_1..g_n (+1 / -1)
  std::vector<RhoSpec> funnels; // rho_2..rho_n
  bool auto_initialize = true;  // rho_i(0) = margin |z_i(0) - eta_{i-1}(0)| + floor
  double margin = 1.5;
  double floor = 0.1;
  void validate(std::size_t levels) const;
};

struct PpcOutput {
  double u = 0.0;
  std::vector<double> xi;   // xi_1..xi_n
  std::vector<double> eta;  // eta_1..eta_n
};

/// Scalar chains only. Throws FunnelBreach when |xi_i| >= 1.
class PpcController {
 public:
  PpcController() = default;
  PpcController(PpcGains gains, RhoSpec rho);

  /// Fixes rho_2(0)..rho_n(0) from the initial state when auto-initializing.
  /// `z` holds z_1..z_n.
  void initialize(std::span<const double> z, double mu1);
  PpcOutput evaluate(std::span<const double> z, double mu1, double t) const;

  const std::vector<RhoSpec>& funnels() const noexcept { return gains_.funnels; }
  const PpcGains& gains() const noexcept { return gains_; }

  /// -k log((1 + xi) / (1 - xi)).
  static double transform(double xi, double k);

 private:
  PpcGains gains_;
  RhoSpec rho_;
};

// ---------------------------------------------------------------------------

struct NussbaumGains {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double k = 1.0;
  ExprVec regressor;          // phi over plant state names
  double zeta0 = 0.0;
  std::vector<double> theta0; // empty means zeros
  void validate() const;
};

struct NussbaumOutput {
  double u = 0.0;
  double alpha = 0.0;
  double zeta_rate = 0.0;
  std::vector<double> theta_rate;
};

/// u = N(zeta) alpha with alpha = k e - nu + theta_hat . phi and N(z) = z^2 cos z.
/// Scalar error only. Throws BarrierBreach when |e| >= rho.
class NussbaumController {
 public:
  NussbaumController() = default;
  NussbaumController(NussbaumGains gains, std::vector<std::string> state_names);

  static double gain(double zeta) noexcept;
  std::size_t regressor_dim() const noexcept { return gains_.regressor.size(); }
  const NussbaumGains& gains() const noexcept { return gains_; }

  NussbaumOutput evaluate(double e, double nu, double rho, double zeta, std::span<const double> theta_hat,
                          std::span<const double> state) const;

 private:
  NussbaumGains gains_;
  Program regressor_;
};

// ---------------------------------------------------------------------------

struct DobBackstepGains {
  std::vector<double> k;        // k_1..k_n
  std::vector<double> gamma_f;  // gamma^f_1..gamma^f_{n-1}
  std::vector<double> sigma;    // sigma_1..sigma_n
  std::size_t node_cap = 2'000'000;
  /// Orderings 0 < sigma_i < gamma^f_i and 0 < sigma_n < kappa_n.
  void validate(std::size_t levels, const DobSpec& dob) const;
};

struct DobBackstepOutput {
  std::vector<double> u;
  std::vector<std::vector<double>> eps;  // eps_1..eps_n
};

class DobBacksteppingController {
 public:
  /// Requires n >= 2 and a proxy chain of length n on the plant's x/z_1.
  static DobBacksteppingController build(const PlantSpec& plant, const RhoSpec& rho, const DobSpec& dob,
                                         DobBackstepGains gains);

  /// `state` is x followed by z_1..z_n; `mu` holds mu_1..mu_n flattened.
  /// Throws BarrierBreach when ||e|| >= rho(t).
  DobBackstepOutput evaluate(std::span<const double> state, std::span<const double> mu, std::span<const double> nu,
                             double t, const DobChainState& dob) const;

  /// Input vector in the order of variables().
  std::vector<double> bind(std::span<const double> state, std::span<const double> mu, std::span<const double> nu,
                           double t, const DobChainState& dob) const;

  /// tau_i for i = 1..n-1.
  const ExprVec& tau(std::size_t i) const { return tau_.at(i - 1); }
  const ExprVec& control() const noexcept { return u_; }
  /// eps_i for i = 1..n.
  const ExprVec& error(std::size_t i) const { return eps_.at(i - 1); }
  const std::vector<SymbolicPartial>& partials() const noexcept { return partials_; }
  /// Plant states, mu, nu, t, raw estimates, filtered estimates.
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  std::size_t node_count() const noexcept { return nodes_; }

 private:
  std::size_t levels_ = 0;
  std::size_t x_dim_ = 0;
  std::size_t p1_ = 0;
  std::size_t mu_dim_ = 0;
  RhoSpec rho_;
  std::vector<ExprVec> tau_;
  ExprVec u_;
  std::vector<ExprVec> eps_;
  std::vector<SymbolicPartial> partials_;
  std::vector<std::string> variables_;
  std::size_t nodes_ = 0;
  Program program_;  // u, then eps_1..eps_n
};

}  // namespace pcbf
