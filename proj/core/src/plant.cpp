#include "pcbf/plant.hpp"

#include <algorithm>
#include <set>

#include "pcbf/barrier.hpp"

namespace pcbf {

std::size_t PlantSpec::state_dim() const {
  std::size_t n = x_dim();
  for (const auto& b : z_names) n += b.size();
  return n;
}

std::vector<std::string> PlantSpec::state_names() const {
  std::vector<std::string> out = x_names;
  for (const auto& b : z_names) out.insert(out.end(), b.begin(), b.end());
  return out;
}

bool PlantSpec::disturbed() const {
  return std::any_of(disturbance.begin(), disturbance.end(), [](const ExprVec& d) { return !d.empty(); });
}

void PlantSpec::validate() const {
  const std::size_t n = levels();
  const std::size_t p = x_dim();
  if (p == 0) throw SpecError("plant: x must have at least one component");
  if (n == 0) throw SpecError("plant: at least one z block is required");
  if (input_dim == 0) throw SpecError("plant: input dimension must be positive");
  if (f.size() != n || g.size() != n) throw SpecError("plant: need f_i and g_i for every level");
  if (!disturbance.empty() && disturbance.size() != n) throw SpecError("plant: need one disturbance block per level");

  std::set<std::string> seen;
  for (const auto& name : state_names()) {
    if (symbols::is_reserved(name)) throw SpecError("plant: state name '" + name + "' is reserved");
    if (!seen.insert(name).second) throw SpecError("plant: duplicate state name '" + name + "'");
  }
  for (const auto& b : z_names)
    if (b.empty()) throw SpecError("plant: z blocks must be nonempty");

  if (f0.size() != p) throw SpecError("plant: f0 must have length dim(x)");
  if (g0.rows() != p || g0.cols() != block_dim(0)) throw SpecError("plant: g0 must be dim(x) x dim(z_1)");

  auto check_vars = [&](const std::vector<Expr>& exprs, const std::set<std::string>& allowed, const std::string& what) {
    for (const auto& v : free_variables(std::span<const Expr>(exprs))) {
      if (!allowed.count(v)) throw SpecError("plant: " + what + " references '" + v + "' which it may not depend on");
    }
  };

  std::set<std::string> allowed(x_names.begin(), x_names.end());
  {
    std::vector<Expr> all(f0.begin(), f0.end());
    all.insert(all.end(), g0.data().begin(), g0.data().end());
    check_vars(all, allowed, "f0/g0");
  }
  for (std::size_t i = 0; i < n; ++i) {
    allowed.insert(z_names[i].begin(), z_names[i].end());
    const std::size_t next = i + 1 < n ? block_dim(i + 1) : input_dim;
    const std::string lvl = std::to_string(i + 1);
    if (f[i].size() != block_dim(i)) throw SpecError("plant: f_" + lvl + " has wrong length");
    if (g[i].rows() != block_dim(i) || g[i].cols() != next) throw SpecError("plant: g_" + lvl + " has wrong shape");
    std::vector<Expr> all(f[i].begin(), f[i].end());
    all.insert(all.end(), g[i].data().begin(), g[i].data().end());
    check_vars(all, allowed, "f_" + lvl + "/g_" + lvl);
    if (!disturbance.empty() && !disturbance[i].empty()) {
      if (disturbance[i].size() != block_dim(i)) throw SpecError("plant: d_" + lvl + " has wrong length");
      check_vars(disturbance[i], {symbols::kTime}, "d_" + lvl);
    }
  }
}

PlantModel::PlantModel(PlantSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  std::vector<Expr> outs(spec_.f0.begin(), spec_.f0.end());
  g0_slot_ = outs.size();
  outs.insert(outs.end(), spec_.g0.data().begin(), spec_.g0.data().end());
  std::size_t off = spec_.x_dim();
  for (std::size_t i = 0; i < spec_.levels(); ++i) {
    offsets_.push_back(off);
    off += spec_.block_dim(i);
    f_slots_.push_back(outs.size());
    outs.insert(outs.end(), spec_.f[i].begin(), spec_.f[i].end());
    g_slots_.push_back(outs.size());
    outs.insert(outs.end(), spec_.g[i].data().begin(), spec_.g[i].data().end());
    d_slots_.push_back(outs.size());
    if (!spec_.disturbance.empty() && !spec_.disturbance[i].empty()) {
      outs.insert(outs.end(), spec_.disturbance[i].begin(), spec_.disturbance[i].end());
    }
  }
  d_slots_.push_back(outs.size());
  auto inputs = spec_.state_names();
  inputs.push_back(symbols::kTime);
  program_ = Program(outs, std::move(inputs));
}

PlantModel::Terms PlantModel::terms(std::span<const double> state, double t) const {
  if (state.size() != spec_.state_dim()) throw SpecError("plant: state has wrong dimension");
  std::vector<double> in(state.begin(), state.end());
  in.push_back(t);
  thread_local std::vector<double> scratch;
  std::vector<double> out(program_.output_count());
  program_.evaluate(in, out, scratch);

  Terms r;
  r.f0.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(g0_slot_));
  r.g0.assign(out.begin() + static_cast<std::ptrdiff_t>(g0_slot_),
              out.begin() + static_cast<std::ptrdiff_t>(f_slots_.empty() ? out.size() : f_slots_[0]));
  for (std::size_t i = 0; i < spec_.levels(); ++i) {
    auto at = [&](std::size_t k) { return out.begin() + static_cast<std::ptrdiff_t>(k); };
    r.f.emplace_back(at(f_slots_[i]), at(g_slots_[i]));
    r.g.emplace_back(at(g_slots_[i]), at(d_slots_[i]));
    const std::size_t dend = i + 1 < spec_.levels() ? f_slots_[i + 1] : d_slots_.back();
    if (dend > d_slots_[i]) {
      r.d.emplace_back(at(d_slots_[i]), at(dend));
    } else {
      r.d.emplace_back(spec_.block_dim(i), 0.0);
    }
  }
  return r;
}

std::vector<double> mat_vec(std::span<const double> m, std::size_t rows, std::size_t cols, std::span<const double> v) {
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) y[r] += m[r * cols + c] * v[c];
  return y;
}

std::vector<std::vector<double>> PlantModel::drive(const Terms& tm, std::span<const double> state,
                                                   std::span<const double> u) const {
  if (u.size() != spec_.input_dim) throw SpecError("plant: input has wrong dimension");
  const std::size_t n = spec_.levels();
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t rows = spec_.block_dim(i);
    std::span<const double> next =
        i + 1 < n ? state.subspan(offsets_[i + 1], spec_.block_dim(i + 1)) : u;
    out[i] = mat_vec(tm.g[i], rows, next.size(), next);
    for (std::size_t c = 0; c < rows; ++c) out[i][c] += tm.f[i][c];
  }
  return out;
}

std::vector<double> PlantModel::derivative(const Terms& tm, std::span<const double> state,
                                           std::span<const double> u) const {
  std::vector<double> dx(state.size());
  const std::size_t p = spec_.x_dim();
  auto xdot = mat_vec(tm.g0, p, spec_.block_dim(0), state.subspan(offsets_[0], spec_.block_dim(0)));
  for (std::size_t k = 0; k < p; ++k) dx[k] = tm.f0[k] + xdot[k];
  const auto dr = drive(tm, state, u);
  for (std::size_t i = 0; i < spec_.levels(); ++i) {
    for (std::size_t c = 0; c < dr[i].size(); ++c) dx[offsets_[i] + c] = dr[i][c] + tm.d[i][c];
  }
  return dx;
}

std::vector<double> PlantModel::derivative(std::span<const double> state, std::span<const double> u, double t) const {
  return derivative(terms(state, t), state, u);
}

}  // namespace pcbf
