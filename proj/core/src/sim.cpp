#include "pcbf/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcbf/filter.hpp"

namespace pcbf {

std::vector<double> rk4_step(const OdeRhs& f, double t, std::span<const double> y, double dt) {
  const std::size_t n = y.size();
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  f(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  f(t + 0.5 * dt, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  f(t + 0.5 * dt, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  f(t + dt, tmp, k4);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

bool SimTrace::has_column(std::string_view name) const noexcept {
  return std::find(columns.begin(), columns.end(), name) != columns.end();
}

std::size_t SimTrace::column_index(std::string_view name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw SpecError("trace has no column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

std::vector<double> SimTrace::column(std::string_view name) const {
  const std::size_t k = column_index(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

const char* to_string(RunVerdict v) noexcept {
  switch (v) {
    case RunVerdict::Safe: return "SAFE";
    case RunVerdict::Unsafe: return "UNSAFE";
    case RunVerdict::Aborted: return "ABORTED";
  }
  return "?";
}

double total_variation(const SimTrace& trace, std::string_view column, double t0, double t1) {
  const std::size_t tk = trace.column_index("t");
  const std::size_t ck = trace.column_index(column);
  double tv = 0.0;
  const std::vector<double>* prev = nullptr;
  for (const auto& r : trace.rows) {
    if (r[tk] < t0 || r[tk] > t1) continue;
    if (prev) tv += std::abs(r[ck] - (*prev)[ck]);
    prev = &r;
  }
  return tv;
}

std::vector<ConditionReport> check_scenario(const CompiledScenario& sc) {
  const auto state = sc.initial_state();
  const std::span<const double> x0(state.data(), sc.plant.x_dim());
  const auto mu0 = sc.initial_virtual_state();
  std::vector<ConditionReport> out;
  for (std::size_t k = 0; k < sc.stacks.size(); ++k) {
    out.push_back(check_conditions(sc.stacks[k], x0, mu0, sc.boxes[k]));
  }
  return out;
}

namespace {

std::string comp_name(const std::string& base, std::size_t c, std::size_t dim) {
  return dim > 1 ? base + "_" + std::to_string(c + 1) : base;
}

struct Controls {
  std::vector<double> nu_d, nu, u;
  std::vector<ConstraintValue> constraints;
  std::vector<double> residual;
  bool joint = false;
  std::vector<double> e;
  double rho = 0.0;
  double zeta_rate = 0.0;
  std::vector<double> theta_rate;
  std::vector<double> internals;
};

class Runner {
 public:
  explicit Runner(const CompiledScenario& sc) : sc_(sc) {
    const PlantSpec& p = sc.plant;
    plant_n_ = p.state_dim();
    p_ = p.x_dim();
    p1_ = sc.virtual_dim();
    m_ = sc.chain_length();
    n_ = p.levels();
    mu_off_ = plant_n_;
    s_off_ = mu_off_ + m_ * p1_;
    std::size_t off = s_off_;
    if (sc.kind == ControllerKind::DobBackstepping) {
      const DobSpec& d = sc.control.dob.observer;
      for (std::size_t i = 0; i < n_; ++i) off += p.block_dim(i);
      filt_off_ = off;
      for (std::size_t i = 0; i + 1 < n_; ++i) off += d.time_constants[i].size() * p.block_dim(i);
    } else {
      filt_off_ = off;
    }
    zeta_off_ = off;
    if (sc.kind == ControllerKind::Nussbaum) off += 1 + sc.nussbaum->regressor_dim();
    total_ = off;
    reference_ = Program(sc.reference, {symbols::kTime});
  }

  std::size_t size() const noexcept { return total_; }

  std::vector<double> initial(PpcController* ppc) const {
    std::vector<double> y(total_, 0.0);
    const auto s0 = sc_.initial_state();
    std::copy(s0.begin(), s0.end(), y.begin());
    const auto mu0 = sc_.initial_virtual_state();
    std::copy(mu0.begin(), mu0.end(), y.begin() + static_cast<std::ptrdiff_t>(mu_off_));
    if (sc_.kind == ControllerKind::DobBackstepping) {
      const auto st = initial_dob_state(sc_.control.dob.observer, z_blocks(y));
      std::size_t k = s_off_;
      for (const auto& b : st.s)
        for (double v : b) y[k++] = v;
    }
    if (sc_.kind == ControllerKind::Nussbaum) {
      const auto& g = sc_.nussbaum->gains();
      y[zeta_off_] = g.zeta0;
      for (std::size_t i = 0; i < g.theta0.size(); ++i) y[zeta_off_ + 1 + i] = g.theta0[i];
    }
    if (ppc) {
      std::vector<double> z;
      for (std::size_t i = 0; i < n_; ++i) z.push_back(y[sc_.model.offset(i)]);
      ppc->initialize(z, y[mu_off_]);
    }
    return y;
  }

  /// Plant state as the controllers see it: in a proxy-only run z_1 is mu_1.
  std::vector<double> plant_state(std::span<const double> y) const {
    std::vector<double> ps(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(plant_n_));
    if (sc_.kind == ControllerKind::Proxy) {
      for (std::size_t c = 0; c < p1_; ++c) ps[sc_.model.offset(0) + c] = y[mu_off_ + c];
    }
    return ps;
  }

  std::vector<Block> z_blocks(std::span<const double> y) const {
    std::vector<Block> z;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t o = sc_.model.offset(i);
      z.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(o),
                     y.begin() + static_cast<std::ptrdiff_t>(o + sc_.plant.block_dim(i)));
    }
    return z;
  }

  DobChainState dob_state(std::span<const double> y) const {
    const DobSpec& d = sc_.control.dob.observer;
    const auto z = z_blocks(y);
    DobChainState st;
    std::size_t k = s_off_;
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t dim = sc_.plant.block_dim(i);
      st.s.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(k), y.begin() + static_cast<std::ptrdiff_t>(k + dim));
      k += dim;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      std::vector<Block> chain;
      const std::size_t stages = i + 1 < n_ ? d.time_constants[i].size() : 0;
      const std::size_t dim = sc_.plant.block_dim(i);
      for (std::size_t j = 0; j < stages; ++j) {
        chain.emplace_back(y.begin() + static_cast<std::ptrdiff_t>(k), y.begin() + static_cast<std::ptrdiff_t>(k + dim));
        k += dim;
      }
      st.filtered.push_back(std::move(chain));
    }
    refresh_estimates(d, st, z);
    return st;
  }

  Controls controls(double t, std::span<const double> y, const PpcController* ppc) const {
    Controls c;
    const auto ps = plant_state(y);
    const std::span<const double> x(ps.data(), p_);
    const std::span<const double> mu = y.subspan(mu_off_, m_ * p1_);

    c.nu_d = sc_.nominal.evaluate(x, mu, t);
    std::vector<HalfSpace> hs;
    for (const auto& stack : sc_.stacks) {
      c.constraints.push_back(stack.eval_constraint(x, mu, t));
      hs.push_back({c.constraints.back().psi0, c.constraints.back().psi1});
    }
    if (sc_.control.filter) {
      FilterOutcome fo = filter_sequential(c.nu_d, hs);
      c.nu = std::move(fo.nu);
      c.joint = fo.joint;
    } else {
      c.nu = c.nu_d;
    }
    for (const auto& h : hs) c.residual.push_back(h.residual(c.nu));

    c.e.resize(p1_);
    for (std::size_t k = 0; k < p1_; ++k) c.e[k] = ps[sc_.model.offset(0) + k] - mu[k];
    c.rho = sc_.spec.rho(t);

    switch (sc_.kind) {
      case ControllerKind::Proxy:
        c.u.assign(sc_.plant.input_dim, 0.0);
        break;
      case ControllerKind::Ppc: {
        std::vector<double> z;
        for (std::size_t i = 0; i < n_; ++i) z.push_back(ps[sc_.model.offset(i)]);
        const PpcOutput out = ppc->evaluate(z, mu[0], t);
        c.u = {out.u};
        c.internals = out.xi;
        c.internals.insert(c.internals.end(), out.eta.begin(), out.eta.end());
        break;
      }
      case ControllerKind::Nussbaum: {
        const double mu_rate = m_ == 1 ? c.nu[0] : mu[1];
        const double zeta = y[zeta_off_];
        const std::span<const double> theta = y.subspan(zeta_off_ + 1, sc_.nussbaum->regressor_dim());
        const NussbaumOutput out = sc_.nussbaum->evaluate(c.e[0], mu_rate, c.rho, zeta, theta, ps);
        c.u = {out.u};
        c.zeta_rate = out.zeta_rate;
        c.theta_rate = out.theta_rate;
        c.internals = {zeta};
        c.internals.insert(c.internals.end(), theta.begin(), theta.end());
        c.internals.push_back(out.alpha);
        break;
      }
      case ControllerKind::DobBackstepping: {
        const DobChainState st = dob_state(y);
        const DobBackstepOutput out = sc_.dob_backstepping->evaluate(ps, mu, c.nu, t, st);
        c.u = out.u;
        for (const auto& eps : out.eps) c.internals.insert(c.internals.end(), eps.begin(), eps.end());
        break;
      }
    }
    return c;
  }

  void dynamics(double t, std::span<const double> y, const Controls& c, std::span<double> dy) const {
    std::fill(dy.begin(), dy.end(), 0.0);
    const auto ps = plant_state(y);
    const auto terms = sc_.model.terms(ps, t);
    const auto dp = sc_.model.derivative(terms, ps, c.u);
    if (sc_.kind == ControllerKind::Proxy) {
      std::copy_n(dp.begin(), p_, dy.begin());
    } else {
      std::copy(dp.begin(), dp.end(), dy.begin());
    }
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t k = 0; k < p1_; ++k) {
        dy[mu_off_ + i * p1_ + k] = i + 1 < m_ ? y[mu_off_ + (i + 1) * p1_ + k] : c.nu[k];
      }
    }
    if (sc_.kind == ControllerKind::DobBackstepping) {
      const DobSpec& d = sc_.control.dob.observer;
      const DobChainState st = dob_state(y);
      const auto ds = dob_derivative(d, st, sc_.model.drive(terms, ps, c.u));
      std::size_t k = s_off_;
      for (const auto& b : ds)
        for (double v : b) dy[k++] = v;
      for (const auto& chain : filter_derivative(d, st))
        for (const auto& b : chain)
          for (double v : b) dy[k++] = v;
    }
    if (sc_.kind == ControllerKind::Nussbaum) {
      dy[zeta_off_] = c.zeta_rate;
      for (std::size_t i = 0; i < c.theta_rate.size(); ++i) dy[zeta_off_ + 1 + i] = c.theta_rate[i];
    }
  }

  std::vector<std::string> columns() const {
    const PlantSpec& p = sc_.plant;
    const bool multi = sc_.stacks.size() > 1;
    auto barrier_name = [&](const std::string& base, std::size_t k) {
      return multi ? base + "_" + sc_.spec.safety[k].name : base;
    };
    std::vector<std::string> cols{"t"};
    for (const auto& n : p.state_names()) cols.push_back(n);
    for (std::size_t i = 1; i <= m_; ++i)
      for (const auto& n : symbols::virtual_states(i, p1_)) cols.push_back(n);
    for (std::size_t c = 0; c < p1_; ++c) cols.push_back(comp_name("e", c, p1_));
    cols.push_back("rho");
    for (const auto& n : p.x_names) cols.push_back(p_ > 1 ? "xd_" + n : std::string("xd"));
    cols.push_back("h");
    if (multi)
      for (std::size_t k = 0; k < sc_.stacks.size(); ++k) cols.push_back(barrier_name("h", k));
    for (std::size_t k = 0; k < sc_.stacks.size(); ++k) {
      for (std::size_t i = 0; i <= m_; ++i) cols.push_back(barrier_name("b" + std::to_string(i), k));
      cols.push_back(barrier_name("psi0", k));
      for (std::size_t c = 0; c < p1_; ++c) cols.push_back(barrier_name(comp_name("psi1", c, p1_), k));
    }
    for (std::size_t c = 0; c < p1_; ++c) cols.push_back(comp_name("nu_d", c, p1_));
    for (std::size_t c = 0; c < p1_; ++c) cols.push_back(comp_name("nu", c, p1_));
    for (std::size_t c = 0; c < p.input_dim; ++c) cols.push_back(comp_name("u", c, p.input_dim));
    if (multi) cols.push_back("qp_joint");
    if (p.disturbed()) {
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t c = 0; c < p.block_dim(i); ++c) cols.push_back(comp_name("d" + std::to_string(i + 1), c, p.block_dim(i)));
    }
    switch (sc_.kind) {
      case ControllerKind::Proxy: break;
      case ControllerKind::Ppc:
        for (std::size_t i = 1; i <= n_; ++i) cols.push_back("xi" + std::to_string(i));
        for (std::size_t i = 1; i <= n_; ++i) cols.push_back("eta" + std::to_string(i));
        break;
      case ControllerKind::Nussbaum:
        cols.push_back("zeta");
        for (std::size_t i = 1; i <= sc_.nussbaum->regressor_dim(); ++i) cols.push_back("theta_hat" + std::to_string(i));
        cols.push_back("alpha");
        break;
      case ControllerKind::DobBackstepping: {
        const DobSpec& d = sc_.control.dob.observer;
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t c = 0; c < p.block_dim(i); ++c) cols.push_back(symbols::estimate(i + 1, c, p.block_dim(i)));
        for (std::size_t i = 0; i + 1 < n_; ++i)
          for (std::size_t j = 1; j <= d.time_constants[i].size(); ++j)
            for (std::size_t c = 0; c < p.block_dim(i); ++c)
              cols.push_back(symbols::filtered_estimate(i + 1, j, c, p.block_dim(i)));
        for (std::size_t i = 0; i < n_; ++i) {
          const std::size_t dim = i == 0 ? p1_ : p.block_dim(i);
          for (std::size_t c = 0; c < dim; ++c) cols.push_back(comp_name("eps" + std::to_string(i + 1), c, dim));
        }
        break;
      }
    }
    if (sc_.spec.reference_units == "deg") {
      for (const auto& n : p.x_names) cols.push_back(n + "_deg");
      for (const auto& n : p.x_names) cols.push_back(p_ > 1 ? "xd_" + n + "_deg" : std::string("xd_deg"));
    }
    cols.push_back("safe");
    return cols;
  }

  std::vector<double> row(double t, std::span<const double> y, const Controls& c) const {
    const PlantSpec& p = sc_.plant;
    std::vector<double> r{t};
    const auto ps = plant_state(y);
    r.insert(r.end(), ps.begin(), ps.end());
    r.insert(r.end(), y.begin() + static_cast<std::ptrdiff_t>(mu_off_),
             y.begin() + static_cast<std::ptrdiff_t>(mu_off_ + m_ * p1_));
    r.insert(r.end(), c.e.begin(), c.e.end());
    r.push_back(c.rho);
    const double tin[1] = {t};
    const auto xd = reference_(tin);
    r.insert(r.end(), xd.begin(), xd.end());
    double hmin = std::numeric_limits<double>::infinity();
    for (const auto& cv : c.constraints) hmin = std::min(hmin, cv.h);
    r.push_back(hmin);
    if (c.constraints.size() > 1)
      for (const auto& cv : c.constraints) r.push_back(cv.h);
    for (const auto& cv : c.constraints) {
      r.insert(r.end(), cv.barriers.begin(), cv.barriers.end());
      r.push_back(cv.psi0);
      r.insert(r.end(), cv.psi1.begin(), cv.psi1.end());
    }
    r.insert(r.end(), c.nu_d.begin(), c.nu_d.end());
    r.insert(r.end(), c.nu.begin(), c.nu.end());
    r.insert(r.end(), c.u.begin(), c.u.end());
    if (c.constraints.size() > 1) r.push_back(c.joint ? 1.0 : 0.0);
    if (p.disturbed()) {
      const auto terms = sc_.model.terms(ps, t);
      for (const auto& d : terms.d) r.insert(r.end(), d.begin(), d.end());
    }
    if (sc_.kind == ControllerKind::DobBackstepping) {
      const DobChainState st = dob_state(y);
      for (const auto& d : st.estimate) r.insert(r.end(), d.begin(), d.end());
      for (const auto& chain : st.filtered)
        for (const auto& f : chain) r.insert(r.end(), f.begin(), f.end());
    }
    r.insert(r.end(), c.internals.begin(), c.internals.end());
    if (sc_.spec.reference_units == "deg") {
      const double k = 180.0 / std::numbers::pi;
      for (std::size_t i = 0; i < p_; ++i) r.push_back(ps[i] * k);
      for (double v : xd) r.push_back(v * k);
    }
    r.push_back(step_safe(c) ? 1.0 : 0.0);
    return r;
  }

  static double norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double a : v) s += a * a;
    return std::sqrt(s);
  }

  static bool step_safe(const Controls& c) {
    for (const auto& cv : c.constraints)
      if (cv.h < -kSafetyTolerance) return false;
    return norm(c.e) <= c.rho + kFunnelTolerance;
  }

  std::size_t mu_offset() const noexcept { return mu_off_; }

 private:
  const CompiledScenario& sc_;
  std::size_t plant_n_ = 0, p_ = 0, p1_ = 0, m_ = 0, n_ = 0;
  std::size_t mu_off_ = 0, s_off_ = 0, filt_off_ = 0, zeta_off_ = 0, total_ = 0;
  Program reference_;
};

void update_monitors(Monitors& mon, const Controls& c, std::span<const double> mu, std::size_t m, std::size_t p1,
                     const std::vector<double>* prev_nu, double dt) {
  for (std::size_t k = 0; k < c.constraints.size(); ++k) {
    const auto& cv = c.constraints[k];
    mon.min_h_each[k] = std::min(mon.min_h_each[k], cv.h);
    mon.min_h = std::min(mon.min_h, cv.h);
    for (std::size_t i = 0; i < cv.barriers.size(); ++i) mon.min_b[k][i] = std::min(mon.min_b[k][i], cv.barriers[i]);
    mon.min_constraint_residual = std::min(mon.min_constraint_residual, c.residual[k]);
  }
  if (std::any_of(c.residual.begin(), c.residual.end(), [](double r) { return r < -kConstraintSlack; })) {
    ++mon.constraint_violations;
  }
  if (c.joint) ++mon.joint_projections;
  const double en = Runner::norm(c.e);
  mon.max_error_excess = std::max(mon.max_error_excess, en - c.rho);
  mon.max_error_ratio = std::max(mon.max_error_ratio, en / c.rho);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < p1; ++k) mon.max_abs_mu[i] = std::max(mon.max_abs_mu[i], std::abs(mu[i * p1 + k]));
  }
  if (prev_nu) {
    double d = 0.0;
    for (std::size_t k = 0; k < c.nu.size(); ++k) d = std::max(d, std::abs(c.nu[k] - (*prev_nu)[k]));
    mon.max_nu_rate = std::max(mon.max_nu_rate, d / dt);
  }
}

}  // namespace

SimResult simulate(const CompiledScenario& sc_in, const SimOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  SimResult res;
  res.scenario = sc_in.spec.name;
  res.controller = sc_in.controller_name;

  const double dt = options.dt.value_or(sc_in.spec.dt);
  const double horizon = options.horizon.value_or(sc_in.spec.horizon);
  const double hold = options.hold_dt.value_or(sc_in.spec.hold_dt);
  if (!(dt > 0.0) || !(horizon > 0.0) || !(hold >= 0.0)) throw SpecError("simulate: dt and horizon must be positive");

  // PPC funnels are fixed from the initial state, so work on a copy.
  CompiledScenario sc = sc_in;
  PpcController* ppc = sc.ppc ? &*sc.ppc : nullptr;
  const Runner runner(sc);

  res.conditions = check_scenario(sc);
  for (std::size_t k = 0; k < res.conditions.size(); ++k) {
    if (res.conditions[k].passed()) continue;
    const std::string msg = "feasibility conditions fail for barrier '" + sc.spec.safety[k].name + "'";
    if (!options.force) {
      res.verdict = RunVerdict::Aborted;
      res.failure = msg;
      return res;
    }
    res.warnings.push_back(msg + " (run forced)");
  }

  Monitors& mon = res.monitors;
  mon.min_h = std::numeric_limits<double>::infinity();
  mon.min_h_each.assign(sc.stacks.size(), std::numeric_limits<double>::infinity());
  mon.min_b.assign(sc.stacks.size(), std::vector<double>(sc.chain_length() + 1, std::numeric_limits<double>::infinity()));
  mon.min_constraint_residual = std::numeric_limits<double>::infinity();
  mon.max_error_excess = -std::numeric_limits<double>::infinity();
  mon.max_abs_mu.assign(sc.chain_length(), 0.0);

  res.trace.columns = runner.columns();
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  res.trace.rows.reserve(steps + 1);

  const std::size_t m = sc.chain_length();
  const std::size_t p1 = sc.virtual_dim();
  std::vector<double> y;
  std::optional<Controls> held;
  double next_sample = 0.0;
  std::vector<double> prev_nu;
  try {
    y = runner.initial(ppc);
    for (std::size_t k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      for (double v : y) {
        if (!std::isfinite(v)) throw Error("state became non-finite at t = " + std::to_string(t));
      }
      Controls c = runner.controls(t, y, ppc);
      if (hold > 0.0) {
        if (t + 1e-12 >= next_sample) {
          held = c;
          next_sample += hold;
        }
        // Record what the plant actually receives; diagnostics stay current.
        c.nu_d = held->nu_d;
        c.nu = held->nu;
        c.u = held->u;
        for (std::size_t i = 0; i < c.constraints.size(); ++i)
          c.residual[i] = HalfSpace{c.constraints[i].psi0, c.constraints[i].psi1}.residual(c.nu);
      }
      update_monitors(mon, c, std::span<const double>(y).subspan(runner.mu_offset(), m * p1), m, p1,
                      prev_nu.empty() ? nullptr : &prev_nu, dt);
      prev_nu = c.nu;
      res.trace.rows.push_back(runner.row(t, y, c));
      if (k == steps) break;

      bool first = true;
      const OdeRhs rhs = [&](double ts, std::span<const double> ys, std::span<double> dys) {
        if (hold > 0.0) {
          runner.dynamics(ts, ys, *held, dys);
        } else if (first) {
          runner.dynamics(ts, ys, c, dys);
        } else {
          runner.dynamics(ts, ys, runner.controls(ts, ys, ppc), dys);
        }
        first = false;
      };
      y = rk4_step(rhs, t, y, dt);
    }
  } catch (const Error& e) {
    res.verdict = RunVerdict::Aborted;
    res.failure = e.what();
  }

  if (res.failure.empty()) {
    const bool safe = mon.min_h >= -kSafetyTolerance && mon.max_error_excess <= kFunnelTolerance;
    res.verdict = safe ? RunVerdict::Safe : RunVerdict::Unsafe;
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return res;
}

SimResult simulate(const ScenarioSpec& spec, const SimOptions& options) {
  return simulate(compile_scenario(spec, options.controller), options);
}

}  // namespace pcbf
