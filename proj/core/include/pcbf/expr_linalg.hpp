// Small dense vectors and matrices of expressions.
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcbf/expr.hpp"

namespace pcbf {

using ExprVec = std::vector<Expr>;

/// Row-major matrix of expressions.
class ExprMat {
 public:
  ExprMat() = default;
  ExprMat(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  static ExprMat identity(std::size_t n);
  static ExprMat column(const ExprVec& v);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  Expr& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Expr& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const std::vector<Expr>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Expr> data_;
};

ExprVec variables(std::span<const std::string> names);

ExprVec operator+(const ExprVec& a, const ExprVec& b);
ExprVec operator-(const ExprVec& a, const ExprVec& b);
ExprVec operator-(const ExprVec& a);
ExprVec operator*(const Expr& s, const ExprVec& v);

Expr dot(const ExprVec& a, const ExprVec& b);
Expr squared_norm(const ExprVec& v);
/// Sum of squared entries.
Expr squared_frobenius(const ExprMat& m);

ExprMat transpose(const ExprMat& m);
ExprMat operator*(const ExprMat& a, const ExprMat& b);
ExprVec operator*(const ExprMat& m, const ExprVec& v);
/// Row vector times matrix: (v^T M)^T.
ExprVec row_times(const ExprVec& row, const ExprMat& m);

/// Gradient of a scalar with respect to the named variables.
ExprVec gradient(const Expr& f, std::span<const std::string> vars);
/// Jacobian, rows follow `f`, columns follow `vars`.
ExprMat jacobian(const ExprVec& f, std::span<const std::string> vars);

/// Symbolic inverse by cofactor expansion; dimension at most 3.
ExprMat inverse(const ExprMat& m);
Expr determinant(const ExprMat& m);

/// Moore-Penrose right inverse g^T (g g^T)^{-1} for a wide or square g
/// (rows <= cols, rows <= 3). A 1x1 matrix maps to its reciprocal.
ExprMat right_inverse(const ExprMat& g);

std::vector<std::string> free_variables(std::span<const Expr> exprs);

}  // namespace pcbf
