#include "pcbf/error.hpp"

#include <sstream>

namespace pcbf {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i != 0) out += ", ";
    out += items[i];
  }
  return out;
}

std::string format_vector(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i != 0) os << ", ";
    os << v[i];
  }
  os << ']';
  return os.str();
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ParseError::ParseError(std::string message, std::size_t offset, std::vector<std::string> expected)
    : Error(message + " at offset " + std::to_string(offset) +
            (expected.empty() ? std::string() : " (expected " + join(expected) + ")")),
      offset_(offset),
      expected_(std::move(expected)) {}

UnboundVariable::UnboundVariable(std::string name)
    : Error("unbound variable '" + name + "'"), name_(std::move(name)) {}

DomainError::DomainError(std::string what, std::string subexpression)
    : Error(what + " in '" + subexpression + "'"), subexpression_(std::move(subexpression)) {}

InfeasibleError::InfeasibleError(double psi0, std::vector<double> psi1)
    : Error("CBF-QP infeasible: psi0 = " + format_double(psi0) + ", psi1 = " + format_vector(psi1)),
      psi0_(psi0),
      psi1_(std::move(psi1)) {}

FunnelBreach::FunnelBreach(std::size_t level, double normalized_error)
    : Error("funnel breach at level " + std::to_string(level) +
            ": normalized error = " + format_double(normalized_error)),
      level_(level),
      normalized_error_(normalized_error) {}

BarrierBreach::BarrierBreach(double error_norm, double bound)
    : Error("barrier breach: |e| = " + format_double(error_norm) + " >= rho = " + format_double(bound)),
      error_norm_(error_norm),
      bound_(bound) {}

}  // namespace pcbf
