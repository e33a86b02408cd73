#include "pcbf/filter.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>

#include "pcbf/error.hpp"

namespace pcbf {

double HalfSpace::residual(std::span<const double> nu) const {
  if (nu.size() != psi1.size()) throw SpecError("half-space: dimension mismatch");
  double r = psi0;
  for (std::size_t k = 0; k < nu.size(); ++k) r += psi1[k] * nu[k];
  return r;
}

std::vector<double> solve_cbf_qp(std::span<const double> nominal, double psi0, std::span<const double> psi1,
                                 double eps) {
  if (nominal.size() != psi1.size()) throw SpecError("cbf-qp: nominal and psi1 differ in dimension");
  std::vector<double> nu(nominal.begin(), nominal.end());
  double slack = psi0;
  double norm_sq = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    slack += psi1[k] * nu[k];
    norm_sq += psi1[k] * psi1[k];
  }
  if (!std::isfinite(slack) || !std::isfinite(norm_sq)) {
    throw InfeasibleError(psi0, std::vector<double>(psi1.begin(), psi1.end()));
  }
  if (slack >= 0.0) return nu;
  if (std::sqrt(norm_sq) <= eps) throw InfeasibleError(psi0, std::vector<double>(psi1.begin(), psi1.end()));
  const double step = -slack / norm_sq;
  for (std::size_t k = 0; k < nu.size(); ++k) nu[k] += step * psi1[k];
  return nu;
}

std::vector<double> solve_cbf_qp(std::span<const double> nominal, const HalfSpace& c, double eps) {
  return solve_cbf_qp(nominal, c.psi0, c.psi1, eps);
}

std::vector<double> project_intersection(std::span<const double> nominal, std::span<const HalfSpace> constraints,
                                         double eps) {
  const std::size_t n = nominal.size();
  const std::size_t k = constraints.size();
  if (k > 16) throw SpecError("joint projection supports at most 16 constraints");
  Eigen::Map<const Eigen::VectorXd> nd(nominal.data(), static_cast<Eigen::Index>(n));

  auto feasible = [&](const Eigen::VectorXd& v) {
    for (const auto& c : constraints) {
      if (c.residual(std::span<const double>(v.data(), n)) < -kConstraintSlack) return false;
    }
    return true;
  };

  if (feasible(nd)) return {nominal.begin(), nominal.end()};

  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best;
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) active.push_back(i);
    if (active.size() > n) continue;
    const auto a = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd g(a, static_cast<Eigen::Index>(n));
    Eigen::VectorXd r(a);
    for (Eigen::Index i = 0; i < a; ++i) {
      const HalfSpace& c = constraints[active[static_cast<std::size_t>(i)]];
      if (c.psi1.size() != n) throw SpecError("joint projection: dimension mismatch");
      for (std::size_t j = 0; j < n; ++j) g(i, static_cast<Eigen::Index>(j)) = c.psi1[j];
      r(i) = -(c.psi0 + g.row(i).dot(nd));
    }
    // Active constraints hold with equality: G (nd + G^T l) = -psi0.
    const Eigen::MatrixXd gram = g * g.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
    lu.setThreshold(eps);
    if (lu.rank() < a) continue;
    const Eigen::VectorXd lambda = lu.solve(r);
    if ((lambda.array() < 0.0).any()) continue;
    const Eigen::VectorXd v = nd + g.transpose() * lambda;
    if (!feasible(v)) continue;
    const double cost = (v - nd).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = v;
    }
  }
  if (best.size() == 0) {
    // Report the first violated constraint.
    for (const auto& c : constraints) {
      if (c.residual(nominal) < 0.0) throw InfeasibleError(c.psi0, c.psi1);
    }
    throw InfeasibleError(constraints.front().psi0, constraints.front().psi1);
  }
  return {best.data(), best.data() + best.size()};
}

FilterOutcome filter_sequential(std::span<const double> nominal, std::span<const HalfSpace> constraints,
                                double eps) {
  FilterOutcome out;
  out.nu.assign(nominal.begin(), nominal.end());
  for (const auto& c : constraints) {
    out.nu = solve_cbf_qp(out.nu, c, eps);
    out.stages.push_back(out.nu);
  }
  for (const auto& c : constraints) {
    if (c.residual(out.nu) < -kConstraintSlack) {
      out.nu = project_intersection(nominal, constraints, eps);
      out.joint = true;
      break;
    }
  }
  return out;
}

}  // namespace pcbf
