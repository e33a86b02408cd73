// Exception types raised by the library.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pcbf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t offset, std::vector<std::string> expected);
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(std::string name);
  const std::string& variable() const noexcept { return name_; }

 private:
  std::string name_;
};

/// log of a non-positive number, division by zero and the like.
class DomainError : public Error {
 public:
  DomainError(std::string what, std::string subexpression);
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

/// Dimension or configuration mismatch detected while building symbolic
/// objects.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written, or a CSV file is malformed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The CBF-QP constraint cannot be met: psi1 vanished while psi0 < 0.
class InfeasibleError : public Error {
 public:
  InfeasibleError(double psi0, std::vector<double> psi1);
  double psi0() const noexcept { return psi0_; }
  const std::vector<double>& psi1() const noexcept { return psi1_; }

 private:
  double psi0_;
  std::vector<double> psi1_;
};

/// Prescribed-performance transform left its domain (|xi_i| >= 1).
class FunnelBreach : public Error {
 public:
  FunnelBreach(std::size_t level, double normalized_error);
  std::size_t level() const noexcept { return level_; }
  double normalized_error() const noexcept { return normalized_error_; }

 private:
  std::size_t level_;
  double normalized_error_;
};

/// Barrier Lyapunov function left its domain (||e|| >= rho).
class BarrierBreach : public Error {
 public:
  BarrierBreach(double error_norm, double bound);
  double error_norm() const noexcept { return error_norm_; }
  double bound() const noexcept { return bound_; }

 private:
  double error_norm_;
  double bound_;
};

}  // namespace pcbf
