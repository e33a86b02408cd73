#include "pcbf/controllers.hpp"

#include <cmath>
#include <map>

namespace pcbf {

void DobBackstepGains::validate(std::size_t levels, const DobSpec& dob) const {
  if (levels < 2) throw SpecError("dob-backstepping: needs at least two z levels");
  if (k.size() != levels) throw SpecError("dob-backstepping: need k_1..k_n");
  if (gamma_f.size() != levels - 1) throw SpecError("dob-backstepping: need gamma^f_1..gamma^f_{n-1}");
  if (sigma.size() != levels) throw SpecError("dob-backstepping: need sigma_1..sigma_n");
  for (double v : k)
    if (!(v > 0.0)) throw SpecError("dob-backstepping: gains k_i must be positive");
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    if (!(sigma[i] > 0.0 && sigma[i] < gamma_f[i])) {
      throw SpecError("dob-backstepping: need 0 < sigma_" + std::to_string(i + 1) + " < gamma^f_" +
                      std::to_string(i + 1));
    }
  }
  if (!(sigma.back() > 0.0 && sigma.back() < dob.kappa(levels - 1))) {
    throw SpecError("dob-backstepping: need 0 < sigma_n < kappa_n = alpha_n - nu_n / 2");
  }
  if (node_cap == 0) throw SpecError("dob-backstepping: node cap must be positive");
}

DobBacksteppingController DobBacksteppingController::build(const PlantSpec& plant, const RhoSpec& rho,
                                                           const DobSpec& dob, DobBackstepGains gains) {
  plant.validate();
  rho.validate();
  dob.validate();
  const std::size_t n = plant.levels();
  if (dob.levels() != n) throw SpecError("dob-backstepping: observer must have one level per z block");
  gains.validate(n, dob);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rows = plant.g[i].rows(), cols = plant.g[i].cols();
    if (rows > cols || rows > 3) throw SpecError("dob-backstepping: g_" + std::to_string(i + 1) + " has no right inverse");
  }

  DobBacksteppingController c;
  c.levels_ = n;
  c.rho_ = rho;
  const std::size_t p1 = plant.block_dim(0);
  c.p1_ = p1;
  c.x_dim_ = plant.x_dim();
  c.mu_dim_ = n * p1;
  const std::string t = symbols::kTime;

  // Symbols.
  std::vector<ExprVec> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = pcbf::variables(plant.z_names[i]);
  std::vector<std::vector<std::string>> mu_names(n + 2);
  std::vector<ExprVec> mu(n + 2);
  for (std::size_t i = 1; i <= n; ++i) {
    mu_names[i] = symbols::virtual_states(i, p1);
    mu[i] = pcbf::variables(mu_names[i]);
  }
  for (std::size_t k = 0; k < p1; ++k) mu_names[n + 1].push_back(symbols::virtual_input(k, p1));
  mu[n + 1] = pcbf::variables(mu_names[n + 1]);

  // stage[i][j]: d_hat^f_{i+1,j}, with j = 0 the raw estimate.
  std::vector<std::vector<ExprVec>> stage(n);
  std::vector<std::string> raw_names, filt_names;
  std::map<std::string, Expr, std::less<>> filter_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t d = plant.block_dim(i);
    ExprVec raw;
    for (std::size_t k = 0; k < d; ++k) {
      raw_names.push_back(symbols::estimate(i + 1, k, d));
      raw.push_back(Expr::variable(raw_names.back()));
    }
    stage[i].push_back(raw);
    const std::size_t stages = i + 1 < n ? dob.time_constants[i].size() : 0;
    for (std::size_t j = 1; j <= stages; ++j) {
      ExprVec f;
      for (std::size_t k = 0; k < d; ++k) {
        filt_names.push_back(symbols::filtered_estimate(i + 1, j, k, d));
        f.push_back(Expr::variable(filt_names.back()));
        filter_rate[filt_names.back()] =
            Expr::constant(-dob.time_constants[i][j - 1]) * (f.back() - stage[i][j - 1][k]);
      }
      stage[i].push_back(f);
    }
  }
  auto filtered_top = [&](std::size_t level) -> const ExprVec& {  // d_hat^f_{level, n-level}, 1-based
    return stage[level - 1][n - level];
  };

  const ExprVec x_rate = plant.f0 + plant.g0 * z[0];
  std::vector<ExprVec> z_rate(n);  // known part, levels 1..n-1
  for (std::size_t i = 0; i + 1 < n; ++i) z_rate[i] = plant.f[i] + plant.g[i] * z[i + 1];

  const Expr rho_e = rho.expr(Expr::variable(t));
  const Expr rho_dot = differentiate(rho_e, t);
  const ExprVec e = z[0] - mu[1];
  const Expr gap = rho_e * rho_e - squared_norm(e);
  const double nd = static_cast<double>(n);

  // tau_1
  {
    const Expr funnel = Expr::constant(nd / (4.0 * (gains.gamma_f[0] - gains.sigma[0]))) / gap;
    // (rho_dot / rho) e offsets the funnel motion in d/dt log(rho^2 / (rho^2 - |e|^2)).
    const ExprVec bracket = (rho_dot / rho_e) * e - Expr::constant(gains.k[0]) * e - filtered_top(1) - funnel * e -
                            plant.f[0] + mu[2];
    c.tau_.push_back(right_inverse(plant.g[0]) * bracket);
  }
  c.eps_.push_back(e);

  auto count_nodes = [&](const ExprVec& v) {
    std::size_t total = 0;
    for (const auto& x : v) total += pcbf::node_count(x);
    return total;
  };

  for (std::size_t i = 2; i <= n; ++i) {
    const ExprVec& prev = c.tau_.back();
    const std::string tau_name = "tau" + std::to_string(i - 1);
    const ExprVec eps_i = z[i - 1] - prev;
    c.eps_.push_back(eps_i);

    // Dependency sanity: only earlier z blocks and filtered estimates.
    for (const auto& comp : prev) {
      for (std::size_t j = i; j <= n; ++j)
        for (const auto& v : plant.z_names[j - 1])
          if (depends_on(comp, v)) throw SpecError("dob-backstepping: " + tau_name + " depends on " + v);
      for (const auto& v : raw_names)
        if (depends_on(comp, v)) throw SpecError("dob-backstepping: " + tau_name + " depends on raw estimate " + v);
    }

    auto record = [&](std::size_t r, const std::string& var, const Expr& d) {
      const std::string comp = prev.size() > 1 ? tau_name + "[" + std::to_string(r + 1) + "]" : tau_name;
      c.partials_.push_back({"d" + comp + "/d" + var, prev[r], var, d});
    };

    // N_i: derivative of tau_{i-1} along the known dynamics.
    ExprVec big_n(prev.size());
    std::vector<ExprMat> jz(i);  // jz[j] = d tau_{i-1} / d z_j
    for (std::size_t j = 1; j < i; ++j) jz[j] = jacobian(prev, plant.z_names[j - 1]);
    for (std::size_t r = 0; r < prev.size(); ++r) {
      const Expr& f = prev[r];
      Expr acc = differentiate(f, t);
      record(r, t, acc);
      for (std::size_t k = 0; k < plant.x_names.size(); ++k) {
        const Expr d = differentiate(f, plant.x_names[k]);
        record(r, plant.x_names[k], d);
        acc += d * x_rate[k];
      }
      for (std::size_t j = 1; j < i; ++j) {
        for (std::size_t k = 0; k < plant.z_names[j - 1].size(); ++k) {
          const Expr& d = jz[j](r, k);
          record(r, plant.z_names[j - 1][k], d);
          acc += d * z_rate[j - 1][k];
        }
      }
      for (std::size_t j = 1; j <= i; ++j) {
        for (std::size_t k = 0; k < p1; ++k) {
          const Expr d = differentiate(f, mu_names[j][k]);
          if (!d.is_constant(0.0)) record(r, mu_names[j][k], d);
          acc += d * mu[j + 1][k];
        }
      }
      for (const auto& [name, rate] : filter_rate) {
        if (!depends_on(f, name)) continue;
        const Expr d = differentiate(f, name);
        record(r, name, d);
        acc += d * rate;
      }
      big_n[r] = acc;
    }

    ExprVec bracket = big_n - plant.f[i - 1] - filtered_top(i);
    Expr damping = Expr::constant(gains.k[i - 1]);
    if (i < n) {
      damping += Expr::constant((nd - static_cast<double>(i) + 1.0) / (4.0 * (gains.gamma_f[i - 1] - gains.sigma[i - 1])));
    } else {
      damping += Expr::constant(1.0 / (4.0 * (dob.kappa(n - 1) - gains.sigma[n - 1])));
    }
    for (std::size_t j = 1; j < i; ++j) {
      bracket = bracket + jz[j] * filtered_top(j);
      const double w = (nd - static_cast<double>(j) + 1.0) / (4.0 * gains.gamma_f[j - 1]);
      damping += Expr::constant(w) * squared_frobenius(jz[j]);
    }
    bracket = bracket - damping * eps_i;
    const ExprVec l_i = i == 2 ? (Expr::constant(1.0) / gap) * e : c.eps_[i - 2];
    bracket = bracket - transpose(plant.g[i - 2]) * l_i;

    ExprVec next = right_inverse(plant.g[i - 1]) * bracket;
    const std::size_t nodes = count_nodes(next);
    if (nodes > gains.node_cap) {
      throw SpecError("dob-backstepping: expression for " + (i < n ? "tau" + std::to_string(i) : std::string("u")) +
                      " has " + std::to_string(nodes) + " nodes, above the cap of " +
                      std::to_string(gains.node_cap));
    }
    if (i < n) {
      c.tau_.push_back(std::move(next));
    } else {
      c.u_ = std::move(next);
      c.nodes_ = nodes;
    }
  }

  c.variables_ = plant.state_names();
  for (std::size_t i = 1; i <= n + 1; ++i) c.variables_.insert(c.variables_.end(), mu_names[i].begin(), mu_names[i].end());
  c.variables_.push_back(t);
  c.variables_.insert(c.variables_.end(), raw_names.begin(), raw_names.end());
  c.variables_.insert(c.variables_.end(), filt_names.begin(), filt_names.end());

  std::vector<Expr> outs(c.u_.begin(), c.u_.end());
  for (const auto& eps : c.eps_) outs.insert(outs.end(), eps.begin(), eps.end());
  c.program_ = Program(outs, c.variables_);
  return c;
}

std::vector<double> DobBacksteppingController::bind(std::span<const double> state, std::span<const double> mu,
                                                    std::span<const double> nu, double t,
                                                    const DobChainState& dob) const {
  if (mu.size() != mu_dim_ || nu.size() != p1_) throw SpecError("dob-backstepping: virtual state has wrong dimension");
  std::vector<double> in(state.begin(), state.end());
  in.insert(in.end(), mu.begin(), mu.end());
  in.insert(in.end(), nu.begin(), nu.end());
  in.push_back(t);
  for (const auto& d : dob.estimate) in.insert(in.end(), d.begin(), d.end());
  for (const auto& chain : dob.filtered)
    for (const auto& f : chain) in.insert(in.end(), f.begin(), f.end());
  if (in.size() != variables_.size()) throw SpecError("dob-backstepping: state has wrong dimension");
  return in;
}

DobBackstepOutput DobBacksteppingController::evaluate(std::span<const double> state, std::span<const double> mu,
                                                      std::span<const double> nu, double t,
                                                      const DobChainState& dob) const {
  const auto in = bind(state, mu, nu, t, dob);
  // e = z_1 - mu_1; z_1 follows x in the state vector.
  const std::size_t z_off = x_dim_;
  double e_sq = 0.0;
  for (std::size_t k = 0; k < p1_; ++k) {
    const double e = state[z_off + k] - mu[k];
    e_sq += e * e;
  }
  const double r = rho_(t);
  if (!(std::sqrt(e_sq) < r)) throw BarrierBreach(std::sqrt(e_sq), r);

  thread_local std::vector<double> scratch;
  std::vector<double> out(program_.output_count());
  program_.evaluate(in, out, scratch);
  DobBackstepOutput res;
  res.u.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(u_.size()));
  std::size_t k = u_.size();
  for (const auto& eps : eps_) {
    res.eps.emplace_back(out.begin() + static_cast<std::ptrdiff_t>(k),
                         out.begin() + static_cast<std::ptrdiff_t>(k + eps.size()));
    k += eps.size();
  }
  return res;
}

}  // namespace pcbf
