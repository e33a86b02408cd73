// Helpers shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "pcbf/expr.hpp"

namespace pcbf::testing {

/// Five-point central difference of a scalar function.
inline double central_difference(const std::function<double(double)>& f, double v, double h) {
  return (-f(v + 2 * h) + 8 * f(v + h) - 8 * f(v - h) + f(v - 2 * h)) / (12 * h);
}

/// d e / d var at `at` by finite differences on the tree evaluator.
inline double numeric_partial(const Expr& e, Binding at, const std::string& var, double h) {
  const double v0 = at.at(var);
  return central_difference(
      [&](double v) {
        at[var] = v;
        return evaluate(e, at);
      },
      v0, h);
}

inline double relative_error(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace pcbf::testing
