#include "pcbf/controllers.hpp"

#include <cmath>

namespace pcbf {

void NussbaumGains::validate() const {
  if (!(gamma1 > 0.0)) throw SpecError("nussbaum: gamma1 must be positive");
  if (!(gamma2 >= 0.0)) throw SpecError("nussbaum: gamma2 must be nonnegative");
  if (!(k > 0.0)) throw SpecError("nussbaum: k must be positive");
  if (!theta0.empty() && theta0.size() != regressor.size()) {
    throw SpecError("nussbaum: initial parameter estimate must match the regressor length");
  }
  if (!std::isfinite(zeta0)) throw SpecError("nussbaum: zeta0 must be finite");
}

NussbaumController::NussbaumController(NussbaumGains gains, std::vector<std::string> state_names)
    : gains_(std::move(gains)) {
  gains_.validate();
  regressor_ = Program(gains_.regressor, std::move(state_names));
}

double NussbaumController::gain(double zeta) noexcept { return zeta * zeta * std::cos(zeta); }

NussbaumOutput NussbaumController::evaluate(double e, double nu, double rho, double zeta,
                                            std::span<const double> theta_hat, std::span<const double> state) const {
  if (!(std::abs(e) < rho)) throw BarrierBreach(std::abs(e), rho);
  if (theta_hat.size() != regressor_dim()) throw SpecError("nussbaum: parameter estimate has wrong dimension");
  thread_local std::vector<double> scratch;
  std::vector<double> phi(regressor_dim());
  regressor_.evaluate(state, phi, scratch);

  NussbaumOutput out;
  out.alpha = gains_.k * e - nu;
  for (std::size_t i = 0; i < phi.size(); ++i) out.alpha += theta_hat[i] * phi[i];
  out.u = gain(zeta) * out.alpha;
  const double gap = rho * rho - e * e;
  out.zeta_rate = e * out.alpha / gap;
  out.theta_rate.resize(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    out.theta_rate[i] = e * phi[i] / (gains_.gamma1 * gap) - gains_.gamma2 * theta_hat[i];
  }
  return out;
}

}  // namespace pcbf
