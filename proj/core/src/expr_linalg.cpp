#include "pcbf/expr_linalg.hpp"

#include <set>

namespace pcbf {

namespace {
void require(bool ok, const char* what) {
  if (!ok) throw SpecError(what);
}
}  // namespace

ExprMat ExprMat::identity(std::size_t n) {
  ExprMat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = Expr::constant(1.0);
  return m;
}

ExprMat ExprMat::column(const ExprVec& v) {
  ExprMat m(v.size(), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
  return m;
}

ExprVec variables(std::span<const std::string> names) {
  ExprVec out;
  out.reserve(names.size());
  for (const auto& n : names) out.push_back(Expr::variable(n));
  return out;
}

ExprVec operator+(const ExprVec& a, const ExprVec& b) {
  require(a.size() == b.size(), "vector size mismatch in +");
  ExprVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ExprVec operator-(const ExprVec& a, const ExprVec& b) {
  require(a.size() == b.size(), "vector size mismatch in -");
  ExprVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ExprVec operator-(const ExprVec& a) {
  ExprVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = -a[i];
  return out;
}

ExprVec operator*(const Expr& s, const ExprVec& v) {
  ExprVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = s * v[i];
  return out;
}

Expr dot(const ExprVec& a, const ExprVec& b) {
  require(a.size() == b.size(), "vector size mismatch in dot");
  Expr acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc = acc + a[i] * b[i];
  return acc;
}

Expr squared_norm(const ExprVec& v) { return dot(v, v); }

Expr squared_frobenius(const ExprMat& m) { return squared_norm(m.data()); }

ExprMat transpose(const ExprMat& m) {
  ExprMat t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

ExprMat operator*(const ExprMat& a, const ExprMat& b) {
  require(a.cols() == b.rows(), "matrix size mismatch in *");
  ExprMat out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      Expr acc;
      for (std::size_t k = 0; k < a.cols(); ++k) acc = acc + a(r, k) * b(k, c);
      out(r, c) = acc;
    }
  }
  return out;
}

ExprVec operator*(const ExprMat& m, const ExprVec& v) {
  require(m.cols() == v.size(), "matrix-vector size mismatch");
  ExprVec out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Expr acc;
    for (std::size_t c = 0; c < m.cols(); ++c) acc = acc + m(r, c) * v[c];
    out[r] = acc;
  }
  return out;
}

ExprVec row_times(const ExprVec& row, const ExprMat& m) {
  require(row.size() == m.rows(), "row-vector matrix size mismatch");
  ExprVec out(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Expr acc;
    for (std::size_t r = 0; r < m.rows(); ++r) acc = acc + row[r] * m(r, c);
    out[c] = acc;
  }
  return out;
}

ExprVec gradient(const Expr& f, std::span<const std::string> vars) {
  ExprVec out;
  out.reserve(vars.size());
  for (const auto& v : vars) out.push_back(differentiate(f, v));
  return out;
}

ExprMat jacobian(const ExprVec& f, std::span<const std::string> vars) {
  ExprMat out(f.size(), vars.size());
  for (std::size_t r = 0; r < f.size(); ++r)
    for (std::size_t c = 0; c < vars.size(); ++c) out(r, c) = differentiate(f[r], vars[c]);
  return out;
}

Expr determinant(const ExprMat& m) {
  require(m.rows() == m.cols(), "determinant of a non-square matrix");
  switch (m.rows()) {
    case 1: return m(0, 0);
    case 2: return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    case 3:
      return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
             m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
             m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
    default:
      throw SpecError("symbolic determinant supports dimension <= 3");
  }
}

ExprMat inverse(const ExprMat& m) {
  require(m.rows() == m.cols(), "inverse of a non-square matrix");
  const std::size_t n = m.rows();
  if (n == 1) {
    ExprMat out(1, 1);
    out(0, 0) = Expr::constant(1.0) / m(0, 0);
    return out;
  }
  if (n > 3) throw SpecError("symbolic inverse supports dimension <= 3");
  const Expr det = determinant(m);
  ExprMat out(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      ExprMat minor(n - 1, n - 1);
      for (std::size_t i = 0, mi = 0; i < n; ++i) {
        if (i == r) continue;
        for (std::size_t j = 0, mj = 0; j < n; ++j) {
          if (j == c) continue;
          minor(mi, mj++) = m(i, j);
        }
        ++mi;
      }
      const Expr cof = ((r + c) % 2 == 0) ? determinant(minor) : -determinant(minor);
      out(c, r) = cof / det;  // adjugate is the transposed cofactor matrix
    }
  }
  return out;
}

ExprMat right_inverse(const ExprMat& g) {
  require(g.rows() <= g.cols(), "right inverse needs rows <= cols");
  if (g.rows() == 1 && g.cols() == 1) {
    ExprMat out(1, 1);
    out(0, 0) = Expr::constant(1.0) / g(0, 0);
    return out;
  }
  if (g.rows() == g.cols()) return inverse(g);
  const ExprMat gt = transpose(g);
  return gt * inverse(g * gt);
}

std::vector<std::string> free_variables(std::span<const Expr> exprs) {
  std::set<std::string> all;
  for (const auto& e : exprs) {
    auto vars = free_variables(e);
    all.insert(vars.begin(), vars.end());
  }
  return {all.begin(), all.end()};
}

}  // namespace pcbf
