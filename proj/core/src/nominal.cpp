#include "pcbf/controllers.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pcbf {

namespace symbols {

std::string virtual_input(std::size_t component, std::size_t dim) {
  return dim > 1 ? "nu_" + std::to_string(component + 1) : std::string("nu");
}

std::string estimate(std::size_t level, std::size_t component, std::size_t dim) {
  std::string s = "dhat" + std::to_string(level);
  if (dim > 1) s += "_" + std::to_string(component + 1);
  return s;
}

std::string filtered_estimate(std::size_t level, std::size_t stage, std::size_t component, std::size_t dim) {
  std::string s = "dhatf" + std::to_string(level) + "_" + std::to_string(stage);
  if (dim > 1) s += "_" + std::to_string(component + 1);
  return s;
}

}  // namespace symbols

void NominalGains::validate(std::size_t chain_length, std::size_t state_dim) const {
  if (k.size() != chain_length + 1 || c.size() != chain_length + 1) {
    throw SpecError("nominal: need k_0..k_m and c_0..c_m");
  }
  for (double v : k)
    if (!(v > 0.0)) throw SpecError("nominal: gains k_i must be positive");
  for (double v : c)
    if (!(v > 0.0)) throw SpecError("nominal: gains c_i must be positive");
  if (reference.size() != state_dim) throw SpecError("nominal: reference must have one entry per proxy state");
  for (const auto& r : reference) {
    for (const auto& v : free_variables(r)) {
      if (v != symbols::kTime) throw SpecError("nominal: reference may only depend on t, found '" + v + "'");
    }
  }
}

NominalController NominalController::build(const ProxySpec& proxy, NominalGains gains) {
  proxy.validate();
  const std::size_t m = proxy.chain_length;
  const std::size_t p = proxy.state_dim();
  const std::size_t p1 = proxy.input_dim;
  gains.validate(m, p);
  if (p > p1) throw SpecError("nominal: g0 has no right inverse (dim x > dim mu)");

  NominalController nc;
  nc.p_ = p;
  nc.p1_ = p1;
  const auto& xs = proxy.state_names;
  const ExprVec x = pcbf::variables(xs);
  const std::string t = symbols::kTime;
  std::vector<ExprVec> mu(m + 1);
  std::vector<std::vector<std::string>> mu_names(m + 1);
  for (std::size_t i = 1; i <= m; ++i) {
    mu_names[i] = symbols::virtual_states(i, p1);
    mu[i] = pcbf::variables(mu_names[i]);
  }

  const ExprMat& g0 = proxy.input_gain;
  const ExprMat g0t = transpose(g0);
  const ExprMat g0_inv = right_inverse(g0);
  ExprVec xd_dot;
  for (const auto& r : gains.reference) xd_dot.push_back(differentiate(r, t));
  nc.eps0_ = x - gains.reference;
  const ExprVec closed = proxy.drift + g0 * mu[1];

  auto half_inv = [](double c) { return Expr::constant(1.0 / (2.0 * c)); };

  const ExprVec inner = Expr::constant(gains.k[0]) * nc.eps0_ + proxy.drift - xd_dot;
  nc.alpha_.push_back(-(g0_inv * inner) - half_inv(gains.c[0]) * (g0t * nc.eps0_));

  std::vector<ExprVec> eps(m + 1);  // eps[i] = mu_i - alpha_i
  for (std::size_t i = 2; i <= m + 1; ++i) {
    const ExprVec prev = nc.alpha_[i - 2];
    eps[i - 1] = mu[i - 1] - prev;
    const ExprMat jx = jacobian(prev, xs);

    ExprVec next(p1);
    for (std::size_t r = 0; r < p1; ++r) next[r] = differentiate(prev[r], t);
    next = next + jx * closed;
    for (std::size_t j = 1; j + 2 <= i; ++j) next = next + jacobian(prev, mu_names[j]) * mu[j + 1];
    next = next - (i == 2 ? g0t * nc.eps0_ : eps[i - 2]);
    const Expr damping = half_inv(gains.c[i - 1]) * squared_frobenius(jx * g0) + Expr::constant(gains.k[i - 1]);
    next = next - damping * eps[i - 1];
    nc.alpha_.push_back(next);

    const std::string name = "alpha" + std::to_string(i - 1);
    for (std::size_t r = 0; r < p1; ++r) {
      const std::string comp = p1 > 1 ? name + "[" + std::to_string(r + 1) + "]" : name;
      auto record = [&](const std::string& var) {
        nc.partials_.push_back({"d" + comp + "/d" + var, prev[r], var, differentiate(prev[r], var)});
      };
      record(t);
      for (const auto& v : xs) record(v);
      for (std::size_t j = 1; j + 2 <= i; ++j)
        for (const auto& v : mu_names[j]) record(v);
    }
  }

  nc.variables_ = xs;
  for (std::size_t i = 1; i <= m; ++i) nc.variables_.insert(nc.variables_.end(), mu_names[i].begin(), mu_names[i].end());
  nc.variables_.push_back(t);

  std::vector<Expr> outs(nc.alpha_.back().begin(), nc.alpha_.back().end());
  outs.insert(outs.end(), g0.data().begin(), g0.data().end());
  nc.program_ = Program(outs, nc.variables_);
  return nc;
}

std::vector<double> NominalController::evaluate(std::span<const double> x, std::span<const double> mu,
                                                double t) const {
  if (x.size() != p_) throw SpecError("nominal: state has wrong dimension");
  std::vector<double> in(x.begin(), x.end());
  in.insert(in.end(), mu.begin(), mu.end());
  in.push_back(t);
  if (in.size() != program_.input_count()) throw SpecError("nominal: virtual state has wrong dimension");
  thread_local std::vector<double> scratch;
  std::vector<double> out(program_.output_count());
  program_.evaluate(in, out, scratch);

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> g0(
      out.data() + p1_, static_cast<Eigen::Index>(p_), static_cast<Eigen::Index>(p1_));
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(g0);
  const auto& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0) || s(0) / smin > 1e12) {
    throw DomainError("g0 is singular at the current state (condition number above 1e12)", "g0");
  }
  return {out.begin(), out.begin() + static_cast<std::ptrdiff_t>(p1_)};
}

}  // namespace pcbf
