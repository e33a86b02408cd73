#include "pcbf/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace pcbf {

void PpcGains::validate(std::size_t levels) const {
  if (levels == 0) throw SpecError("ppc: at least one level is required");
  if (k.size() != levels) throw SpecError("ppc: need one gain k_i per level");
  if (sign.size() != levels) throw SpecError("ppc: need the sign of every g_i");
  if (funnels.size() != levels - 1) throw SpecError("ppc: need funnels rho_2..rho_n");
  for (double v : k)
    if (!(v > 0.0)) throw SpecError("ppc: gains k_i must be positive");
  for (int s : sign)
    if (s != 1 && s != -1) throw SpecError("ppc: declared sign of g_i must be +1 or -1");
  for (const auto& f : funnels) f.validate();
  if (!(margin > 1.0) || !(floor > 0.0)) throw SpecError("ppc: need margin > 1 and floor > 0");
}

PpcController::PpcController(PpcGains gains, RhoSpec rho) : gains_(std::move(gains)), rho_(rho) {
  rho_.validate();
  gains_.validate(gains_.k.size());
}

double PpcController::transform(double xi, double k) { return -k * std::log((1.0 + xi) / (1.0 - xi)); }

void PpcController::initialize(std::span<const double> z, double mu1) {
  if (z.size() != gains_.k.size()) throw SpecError("ppc: state has wrong number of levels");
  if (!gains_.auto_initialize) return;
  // Funnels are fixed one level at a time, since eta_{i-1}(0) depends on
  // rho_{i-1}(0).
  double eta = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double dev = i == 0 ? z[0] - mu1 : z[i] - eta;
    if (i > 0) {
      RhoSpec& f = gains_.funnels[i - 1];
      f.initial = std::max(gains_.margin * std::abs(dev) + gains_.floor, f.steady);
    }
    const double xi = dev / (i == 0 ? rho_(0.0) : gains_.funnels[i - 1](0.0));
    if (!(std::abs(xi) < 1.0)) throw FunnelBreach(i + 1, xi);
    eta = gains_.sign[i] * transform(xi, gains_.k[i]);
  }
}

PpcOutput PpcController::evaluate(std::span<const double> z, double mu1, double t) const {
  const std::size_t n = gains_.k.size();
  if (z.size() != n) throw SpecError("ppc: state has wrong number of levels");
  PpcOutput out;
  double eta = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = i == 0 ? rho_(t) : gains_.funnels[i - 1](t);
    const double xi = (i == 0 ? z[0] - mu1 : z[i] - eta) / r;
    if (!(std::abs(xi) < 1.0)) throw FunnelBreach(i + 1, xi);
    eta = gains_.sign[i] * transform(xi, gains_.k[i]);
    out.xi.push_back(xi);
    out.eta.push_back(eta);
  }
  out.u = eta;
  return out;
}

}  // namespace pcbf
