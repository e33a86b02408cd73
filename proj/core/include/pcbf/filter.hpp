// Minimally invasive safety filter: project a nominal virtual input onto
// the half-space psi0 + psi1 . nu >= 0.
#pragma once

#include <span>
#include <vector>

namespace pcbf {

inline constexpr double kPsiTolerance = 1e-10;
inline constexpr double kConstraintSlack = 1e-9;

struct HalfSpace {
  double psi0 = 0.0;
  std::vector<double> psi1;

  double residual(std::span<const double> nu) const;  // psi0 + psi1 . nu
};

/// Closed-form solution of  min ||nu - nominal||^2  s.t.  psi0 + psi1 . nu >= 0.
/// Returns the nominal unchanged when it is already feasible. Throws
/// InfeasibleError when the constraint is violated and ||psi1|| <= eps.
std::vector<double> solve_cbf_qp(std::span<const double> nominal, double psi0, std::span<const double> psi1,
                                 double eps = kPsiTolerance);
std::vector<double> solve_cbf_qp(std::span<const double> nominal, const HalfSpace& c, double eps = kPsiTolerance);

struct FilterOutcome {
  std::vector<double> nu;
  std::vector<std::vector<double>> stages;  // output after each sequential projection
  bool joint = false;                       // fell back to the exact intersection solve
};

/// Sequential projection through every constraint in order. If an earlier
/// constraint ends up violated by a later projection, the exact projection
/// onto the intersection is computed by active-set enumeration instead.
FilterOutcome filter_sequential(std::span<const double> nominal, std::span<const HalfSpace> constraints,
                                double eps = kPsiTolerance);

/// Exact Euclidean projection of `nominal` onto the intersection of the
/// half-spaces. Enumerates active sets, so meant for a handful of
/// constraints. Throws InfeasibleError if the intersection is empty.
std::vector<double> project_intersection(std::span<const double> nominal, std::span<const HalfSpace> constraints,
                                         double eps = kPsiTolerance);

}  // namespace pcbf
