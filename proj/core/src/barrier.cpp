#include "pcbf/barrier.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <cmath>
#include <random>

namespace pcbf {

// ---------------------------------------------------------------------------
// RhoSpec

void RhoSpec::validate() const {
  if (!(steady > 0.0)) throw SpecError("rho: steady value must be positive");
  if (!(initial >= steady)) throw SpecError("rho: initial value must be >= steady value");
  if (!(decay >= 0.0)) throw SpecError("rho: decay rate must be nonnegative");
  if (!std::isfinite(initial) || !std::isfinite(decay)) throw SpecError("rho: parameters must be finite");
}

double RhoSpec::operator()(double t) const { return (initial - steady) * std::exp(-decay * t) + steady; }

double RhoSpec::derivative(double t) const { return -decay * (initial - steady) * std::exp(-decay * t); }

Expr RhoSpec::expr(const Expr& t) const {
  return Expr::constant(initial - steady) * exp(Expr::constant(-decay) * t) + Expr::constant(steady);
}

// ---------------------------------------------------------------------------
// symbols

namespace symbols {

std::string virtual_state(std::size_t level, std::size_t component, std::size_t dim) {
  std::string s = "mu" + std::to_string(level);
  if (dim > 1) s += "_" + std::to_string(component + 1);
  return s;
}

std::vector<std::string> virtual_states(std::size_t level, std::size_t dim) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < dim; ++c) out.push_back(virtual_state(level, c, dim));
  return out;
}

std::string switch_output(std::size_t order) { return "y" + std::to_string(order); }

bool is_reserved(std::string_view name) {
  auto digits_follow = [&](std::string_view prefix) {
    if (name.substr(0, prefix.size()) != prefix || name.size() == prefix.size()) return false;
    return std::isdigit(static_cast<unsigned char>(name[prefix.size()])) != 0;
  };
  if (name == "t" || name == "nu" || name == "rho") return true;
  if (name.rfind("nu_", 0) == 0 || name.rfind("dhat", 0) == 0) return true;
  return digits_follow("mu") || digits_follow("y");
}

}  // namespace symbols

// ---------------------------------------------------------------------------
// chi

namespace {

constexpr std::size_t kMaxChiOrder = 8;

class ChiTable {
 public:
  // In w = 1 / (tau - 1), chi = 1 - exp(1 + w) and d/dtau = -w^2 d/dw, so
  // every derivative is exp(1 + w) times a polynomial in w. Differentiating
  // in tau directly would stack (tau - 1) powers that underflow near tau = 1.
  ChiTable() {
    const Expr w = Expr::variable("w");
    std::vector<Expr> derivs{Expr::constant(1.0) - exp(Expr::constant(1.0) + w)};
    for (std::size_t k = 1; k <= kMaxChiOrder; ++k) derivs.push_back(-(w * w) * differentiate(derivs.back(), "w"));
    program_ = Program(derivs, {"w"});
  }

  void eval(double tau, std::span<double> out) const {
    std::vector<double> scratch;
    const double in[1] = {1.0 / (tau - 1.0)};
    program_.evaluate(in, out, scratch);
  }

 private:
  Program program_;
};

const ChiTable& chi_table() {
  static const ChiTable table;
  return table;
}

}  // namespace

std::vector<double> chi_derivatives(double tau, std::size_t max_order) {
  if (max_order > kMaxChiOrder) throw SpecError("chi: derivative order above 8 is not supported");
  std::vector<double> out(max_order + 1, 0.0);
  // For tau >= 1 chi is flat. Just below 1 the exponential underflows long
  // before the rational factors could overflow, so the flat branch is exact
  // to double precision there as well.
  if (tau >= 1.0 || tau / (tau - 1.0) < -700.0) {
    out[0] = 1.0;
    return out;
  }
  std::vector<double> all(kMaxChiOrder + 1);
  chi_table().eval(tau, all);
  std::copy_n(all.begin(), max_order + 1, out.begin());
  return out;
}

double chi(double tau, std::size_t order) { return chi_derivatives(tau, order)[order]; }

// ---------------------------------------------------------------------------
// ProxySpec

void ProxySpec::validate() const {
  const std::size_t p = state_dim();
  if (p == 0) throw SpecError("proxy: state dimension must be positive");
  if (input_dim == 0) throw SpecError("proxy: virtual input dimension must be positive");
  if (chain_length == 0) throw SpecError("proxy: chain length m must be >= 1");
  if (drift.size() != p) throw SpecError("proxy: f0 must have one entry per state");
  if (input_gain.rows() != p || input_gain.cols() != input_dim) {
    throw SpecError("proxy: g0 must be p x p1");
  }
  if (lambda.size() != chain_length + 1) throw SpecError("proxy: need m+1 lambda values");
  if (beta.size() != chain_length) throw SpecError("proxy: need m beta values");
  for (double l : lambda)
    if (!(l > 0.0)) throw SpecError("proxy: lambda values must be positive");
  for (double b : beta)
    if (!(b > 0.0)) throw SpecError("proxy: beta values must be positive");
  if (mode == BarrierMode::Switched && !(xi > 0.0)) throw SpecError("proxy: xi must be positive");
  for (const auto& name : state_names) {
    if (symbols::is_reserved(name)) throw SpecError("proxy: state name '" + name + "' is reserved");
  }
  std::vector<Expr> all(drift.begin(), drift.end());
  all.insert(all.end(), input_gain.data().begin(), input_gain.data().end());
  all.push_back(safety);
  for (const auto& v : free_variables(std::span<const Expr>(all))) {
    if (std::find(state_names.begin(), state_names.end(), v) == state_names.end()) {
      throw SpecError("proxy: f0/g0/h reference undeclared variable '" + v + "'");
    }
  }
}

// ---------------------------------------------------------------------------
// BarrierStack

BarrierStack BarrierStack::build(ProxySpec proxy, RhoSpec rho) {
  proxy.validate();
  rho.validate();

  BarrierStack s;
  const std::size_t m = proxy.chain_length;
  const std::size_t p1 = proxy.input_dim;
  const bool switched = proxy.mode == BarrierMode::Switched;
  const auto& xs = proxy.state_names;

  const Expr t = Expr::variable(symbols::kTime);
  const Expr rho_t = rho.expr(t);
  const Expr rho_sq = rho_t * rho_t;

  std::vector<ExprVec> mu(m + 2);  // mu[1..m]
  for (std::size_t i = 1; i <= m; ++i) {
    auto names = symbols::virtual_states(i, p1);
    mu[i] = pcbf::variables(names);
  }
  std::vector<Expr> y(m + 2);
  for (std::size_t j = 0; j <= m + 1; ++j) y[j] = Expr::variable(symbols::switch_output(j));

  const ExprVec grad_h = gradient(proxy.safety, xs);
  s.lie_gain_ = row_times(grad_h, proxy.input_gain);
  const ExprVec closed_drift = proxy.drift + proxy.input_gain * mu[1];  // f0 + g0 mu_1
  const Expr inv_xi = Expr::constant(1.0 / proxy.xi);

  // M_i = (1/xi) sum_j db/dy_j y_{j+1} dh/dx + db/dx  (switched)
  // M_i = db/dx                                       (plain)
  auto modulator = [&](const Expr& b_prev, std::size_t i) {
    ExprVec grad_b = gradient(b_prev, xs);
    if (!switched) return grad_b;
    Expr weight;
    for (std::size_t j = 0; j < i; ++j) weight = weight + differentiate(b_prev, y[j].name()) * y[j + 1];
    return grad_b + (inv_xi * weight) * grad_h;
  };

  // sum_{j=1}^{upto} db/dmu_j . mu_{j+1}
  auto chain_drift = [&](const Expr& b, std::size_t upto) {
    Expr acc;
    for (std::size_t j = 1; j <= upto; ++j) {
      for (std::size_t c = 0; c < p1; ++c) {
        acc = acc + differentiate(b, mu[j][c].name()) * mu[j + 1][c];
      }
    }
    return acc;
  };

  s.barriers_.push_back(switched ? y[0] : proxy.safety);
  for (std::size_t i = 1; i <= m; ++i) {
    const Expr& prev = s.barriers_.back();
    const ExprVec mi = modulator(prev, i);
    const double beta = proxy.beta[i - 1];
    const double lambda = proxy.lambda[i - 1];
    Expr b = dot(mi, closed_drift) - squared_norm(row_times(mi, proxy.input_gain)) / Expr::constant(2.0 * beta) -
             Expr::constant(beta / 2.0) * rho_sq + Expr::constant(lambda) * prev + differentiate(prev, symbols::kTime) +
             chain_drift(prev, i - 1);
    s.modulators_.push_back(mi);
    s.barriers_.push_back(b);
  }

  const Expr& bm = s.barriers_.back();
  const ExprVec top = modulator(bm, m + 1);
  s.modulators_.push_back(top);
  const Expr robust = sqrt(squared_norm(row_times(top, proxy.input_gain)));
  s.psi0_ = differentiate(bm, symbols::kTime) + chain_drift(bm, m - 1) + dot(top, closed_drift) +
            Expr::constant(proxy.lambda[m]) * bm - robust * rho_t;
  for (std::size_t c = 0; c < p1; ++c) s.psi1_.push_back(differentiate(bm, mu[m][c].name()));

  s.variables_ = xs;
  for (std::size_t i = 1; i <= m; ++i) {
    for (const auto& e : mu[i]) s.variables_.push_back(e.name());
  }
  if (switched) {
    for (std::size_t j = 0; j <= m + 1; ++j) s.variables_.push_back(y[j].name());
  }
  s.variables_.push_back(symbols::kTime);

  std::vector<Expr> outputs{s.psi0_};
  outputs.insert(outputs.end(), s.psi1_.begin(), s.psi1_.end());
  outputs.insert(outputs.end(), s.barriers_.begin(), s.barriers_.end());
  s.program_ = Program(outputs, s.variables_);
  std::vector<Expr> h_out{proxy.safety};
  s.safety_program_ = Program(h_out, xs);

  s.proxy_ = std::move(proxy);
  s.rho_ = rho;
  return s;
}

std::vector<double> BarrierStack::bind(std::span<const double> x, std::span<const double> mu, double t) const {
  const std::size_t m = proxy_.chain_length;
  if (x.size() != proxy_.state_dim()) throw SpecError("barrier: state has wrong dimension");
  if (mu.size() != m * proxy_.input_dim) throw SpecError("barrier: virtual state has wrong dimension");
  std::vector<double> in;
  in.reserve(variables_.size());
  in.insert(in.end(), x.begin(), x.end());
  in.insert(in.end(), mu.begin(), mu.end());
  if (proxy_.mode == BarrierMode::Switched) {
    const double h = safety_program_(x)[0];
    const auto ys = chi_derivatives(h / proxy_.xi, m + 1);
    in.insert(in.end(), ys.begin(), ys.end());
  }
  in.push_back(t);
  return in;
}

ConstraintValue BarrierStack::eval_constraint(std::span<const double> x, std::span<const double> mu,
                                              double t) const {
  const auto in = bind(x, mu, t);
  std::vector<double> out(program_.output_count());
  std::vector<double> scratch;
  program_.evaluate(in, out, scratch);
  ConstraintValue v;
  const std::size_t p1 = proxy_.input_dim;
  v.psi0 = out[0];
  v.psi1.assign(out.begin() + 1, out.begin() + 1 + static_cast<std::ptrdiff_t>(p1));
  v.barriers.assign(out.begin() + 1 + static_cast<std::ptrdiff_t>(p1), out.end());
  v.h = safety_program_(x)[0];
  return v;
}

double BarrierStack::evaluate_at(const Expr& e, std::span<const double> x, std::span<const double> mu,
                                 double t) const {
  const std::vector<Expr> outs{e};
  return Program(outs, variables_)(bind(x, mu, t))[0];
}

// ---------------------------------------------------------------------------
// Conditions

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::InconclusivePass: return "inconclusive-pass";
    case Verdict::Fail: return "fail";
    case Verdict::Skipped: return "skipped";
  }
  return "?";
}

double DecayingSum::operator()(double t) const {
  const double w = std::exp(-rate * t);
  return constant + slow * w + fast * w * w;
}

double DecayingSum::supremum() const {
  if (rate == 0.0) return constant + slow + fast;
  // w = exp(-rate t) sweeps (0, 1]; maximize c + s w + f w^2 there.
  double best = std::max(constant, constant + slow + fast);
  if (fast < 0.0) {
    const double w = -slow / (2.0 * fast);
    if (w > 0.0 && w < 1.0) best = std::max(best, constant + slow * w + fast * w * w);
  }
  return best;
}

DecayingSum condition_two_operator(const ProxySpec& proxy, const RhoSpec& rho) {
  // rho^2 = A^2 e^{-2rt} + 2AB e^{-rt} + B^2 with A = rho0 - rho_inf, B = rho_inf.
  const double a = rho.initial - rho.steady;
  const double b = rho.steady;
  const double r = rho.decay;
  const std::size_t m = proxy.chain_length;
  DecayingSum sum;
  sum.rate = r;
  for (std::size_t j = 2; j <= m + 1; ++j) {
    // (d/dt + lambda) c e^{-kt} = (lambda - k) c e^{-kt}
    double k_fast = 1.0, k_slow = 1.0, k_const = 1.0;
    for (std::size_t l = j; l <= m + 1; ++l) {
      const double lam = proxy.lambda[l - 1];
      k_fast *= lam - 2.0 * r;
      k_slow *= lam - r;
      k_const *= lam;
    }
    const double w = proxy.beta[j - 2] / 2.0;
    sum.fast += w * k_fast * a * a;
    sum.slow += w * k_slow * 2.0 * a * b;
    sum.constant += w * k_const * b * b;
  }
  return sum;
}

ConditionTwoResult check_condition_two(const ProxySpec& proxy, const RhoSpec& rho) {
  ConditionTwoResult r;
  if (proxy.mode == BarrierMode::Plain) return r;
  const DecayingSum sum = condition_two_operator(proxy, rho);
  if (!std::isfinite(sum.supremum())) throw SpecError("condition (ii): unbounded operator expansion");
  r.supremum = sum.supremum();
  r.bound = 1.0;
  for (double l : proxy.lambda) r.bound *= l;
  r.margin = r.bound - r.supremum;
  r.verdict = r.supremum <= r.bound ? Verdict::Pass : Verdict::Fail;
  return r;
}

ConditionOneResult check_condition_one(const BarrierStack& stack, const SamplerBox& box) {
  ConditionOneResult r;
  const ProxySpec& proxy = stack.proxy();
  if (proxy.mode == BarrierMode::Plain) return r;
  const std::size_t p = proxy.state_dim();
  if (box.lower.size() != p || box.upper.size() != p) throw SpecError("condition (i): sampler box has wrong dimension");

  std::vector<Expr> outs{proxy.safety};
  outs.insert(outs.end(), stack.lie_gain().begin(), stack.lie_gain().end());
  const Program prog(outs, proxy.state_names);
  std::vector<double> out(prog.output_count());
  std::vector<double> scratch;

  r.min_gain_norm = std::numeric_limits<double>::infinity();
  bool falsified = false;
  auto visit = [&](const std::vector<double>& x) {
    prog.evaluate(x, out, scratch);
    const double h = out[0];
    if (h < 0.0) return;
    ++r.samples;
    double norm_sq = 0.0;
    for (std::size_t c = 1; c < out.size(); ++c) norm_sq += out[c] * out[c];
    const double norm = std::sqrt(norm_sq);
    r.min_gain_norm = std::min(r.min_gain_norm, norm);
    if (norm > box.gain_tolerance) return;
    ++r.degenerate;
    if (h < proxy.xi - 1e-9 && !falsified) {
      falsified = true;
      r.counterexample = x;
    }
  };

  // Odd grid per axis (contains the box centre), then uniform random fill.
  std::size_t per_axis = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(box.samples), 1.0 / p)));
  per_axis = std::max<std::size_t>(per_axis, 3);
  if (per_axis % 2 == 0) --per_axis;
  std::size_t grid_total = 1;
  for (std::size_t d = 0; d < p; ++d) grid_total *= per_axis;
  std::vector<double> x(p);
  for (std::size_t k = 0; k < grid_total; ++k) {
    std::size_t rem = k;
    for (std::size_t d = 0; d < p; ++d) {
      const std::size_t i = rem % per_axis;
      rem /= per_axis;
      const double half = static_cast<double>(per_axis - 1) / 2.0;
      const double centre = 0.5 * (box.lower[d] + box.upper[d]);
      const double step = (box.upper[d] - box.lower[d]) / static_cast<double>(per_axis - 1);
      x[d] = centre + (static_cast<double>(i) - half) * step;
    }
    visit(x);
  }
  std::mt19937_64 rng(box.seed);
  for (std::size_t k = grid_total; k < box.samples; ++k) {
    for (std::size_t d = 0; d < p; ++d) {
      std::uniform_real_distribution<double> dist(box.lower[d], box.upper[d]);
      x[d] = dist(rng);
    }
    visit(x);
  }
  if (r.samples == 0) r.min_gain_norm = 0.0;
  if (falsified) {
    r.verdict = Verdict::Fail;
  } else {
    r.verdict = r.degenerate > 0 ? Verdict::Pass : Verdict::InconclusivePass;
  }
  return r;
}

ConditionThreeResult check_condition_three(const BarrierStack& stack, std::span<const double> x0,
                                           std::span<const double> mu0) {
  ConditionThreeResult r;
  const ConstraintValue v = stack.eval_constraint(x0, mu0, 0.0);
  r.y0 = v.barriers[0];
  r.barriers.assign(v.barriers.begin() + 1, v.barriers.end());
  bool ok = r.y0 > 0.0;
  for (double b : r.barriers) ok = ok && b > 0.0;
  r.verdict = ok ? Verdict::Pass : Verdict::Fail;
  return r;
}

ConditionReport check_conditions(const BarrierStack& stack, std::span<const double> x0, std::span<const double> mu0,
                                 const SamplerBox& box) {
  ConditionReport report;
  report.one = check_condition_one(stack, box);
  report.two = check_condition_two(stack.proxy(), stack.rho());
  report.three = check_condition_three(stack, x0, mu0);
  return report;
}

}  // namespace pcbf
