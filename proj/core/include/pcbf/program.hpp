// Flat evaluation tape compiled from a set of expressions.
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pcbf/expr.hpp"

namespace pcbf {

/// Compiles several output expressions over an ordered list of input
/// variables into a single instruction tape. Structurally identical
/// subexpressions are evaluated once (hash-consing at compile time).
///
/// A Program is immutable; evaluation takes a caller-owned scratch buffer
/// so one Program can serve several threads.
class Program {
 public:
  Program() = default;
  /// Throws UnboundVariable if an output references a variable that is not
  /// listed in `inputs`.
  Program(std::span<const Expr> outputs, std::vector<std::string> inputs);

  std::size_t input_count() const noexcept { return inputs_.size(); }
  std::size_t output_count() const noexcept { return outputs_.size(); }
  std::size_t instruction_count() const noexcept { return code_.size(); }
  const std::vector<std::string>& inputs() const noexcept { return inputs_; }

  /// Throws DomainError naming the offending subexpression.
  void evaluate(std::span<const double> in, std::span<double> out, std::vector<double>& scratch) const;
  std::vector<double> operator()(std::span<const double> in) const;

 private:
  struct Instr {
    Op op;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    double value = 0.0;
  };
  [[noreturn]] void domain_failure(std::size_t index) const;

  std::vector<std::string> inputs_;
  std::vector<Instr> code_;
  std::vector<std::uint32_t> outputs_;
  std::vector<Expr> sources_;  // per instruction, for diagnostics
};

}  // namespace pcbf
