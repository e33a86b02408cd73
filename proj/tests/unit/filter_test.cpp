#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pcbf/error.hpp"
#include "pcbf/filter.hpp"
#include "qp_oracle.hpp"

namespace pcbf {
namespace {

using testing::QpCase;

std::vector<double> solve(const QpCase& q) { return solve_cbf_qp(q.nominal, q.psi0, q.psi1); }

TEST(CbfQp, InactiveConstraintReturnsNominal) {
  EXPECT_EQ(solve({{0.0}, 1.0, {1.0}}), std::vector<double>{0.0});
}

TEST(CbfQp, ScalarProjection) {
  const auto nu = solve({{0.0}, -2.0, {1.0}});
  EXPECT_NEAR(nu[0], 2.0, 1e-15);
  const auto grid = testing::qp_grid_search({{0.0}, -2.0, {1.0}});
  EXPECT_NEAR(grid[0], 2.0, 1e-4);
}

TEST(CbfQp, TwoDimensionalProjection) {
  const auto nu = solve({{0.0, 0.0}, -1.0, {1.0, 1.0}});
  EXPECT_NEAR(nu[0], 0.5, 1e-15);
  EXPECT_NEAR(nu[1], 0.5, 1e-15);
}

TEST(CbfQp, VanishingGainWithViolationIsInfeasible) {
  try {
    solve({{1.0}, -0.5, {1e-12}});
    FAIL();
  } catch (const InfeasibleError& e) {
    EXPECT_DOUBLE_EQ(e.psi0(), -0.5);
    ASSERT_EQ(e.psi1().size(), 1u);
  }
  EXPECT_NO_THROW(solve({{1.0}, 0.5, {0.0}}));
}

TEST(CbfQp, MatchesGridSearchOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 400; ++i) {
    const std::size_t dim = 1 + i % 4;
    const QpCase q = testing::random_qp(rng, dim);
    const auto nu = solve(q);
    const auto ref = testing::qp_grid_search(q);
    for (std::size_t k = 0; k < dim; ++k) ASSERT_NEAR(nu[k], ref[k], 1e-4) << "instance " << i;
    ASSERT_NEAR(testing::qp_objective(nu, q.nominal), testing::qp_objective(ref, q.nominal), 1e-6);
  }
}

TEST(CbfQp, OutputIsFeasibleAndIdempotent) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const QpCase q = testing::random_qp(rng, 1 + i % 4);
    const auto nu = solve(q);
    ASSERT_GE(testing::qp_residual(q, nu), -1e-9);
    const auto again = solve_cbf_qp(nu, q.psi0, q.psi1);
    for (std::size_t k = 0; k < nu.size(); ++k) ASSERT_NEAR(again[k], nu[k], 1e-12);
    if (testing::qp_residual(q, q.nominal) >= 0) {
      ASSERT_EQ(nu, q.nominal);
    }
  }
}

TEST(CbfQp, HalfSpaceOverload) {
  const HalfSpace c{-1.0, {2.0}};
  const std::vector<double> nominal{0.0};
  EXPECT_NEAR(solve_cbf_qp(nominal, c)[0], 0.5, 1e-15);
  EXPECT_NEAR(c.residual(std::vector<double>{0.5}), 0.0, 1e-15);
}

TEST(SequentialFilter, PassesThroughWhenEveryConstraintHolds) {
  const std::vector<HalfSpace> cs{{1.0, {1.0}}, {1.0, {-1.0}}};
  const std::vector<double> nominal{0.2};
  const auto out = filter_sequential(nominal, cs);
  EXPECT_EQ(out.nu, nominal);
  EXPECT_FALSE(out.joint);
  ASSERT_EQ(out.stages.size(), 2u);
}

TEST(SequentialFilter, SecondStageTakesFirstOutputAsNominal) {
  // nu >= 1, then nu >= 2: the second projection keeps the first satisfied.
  const std::vector<HalfSpace> cs{{-1.0, {1.0}}, {-2.0, {1.0}}};
  const std::vector<double> nominal{0.0};
  const auto out = filter_sequential(nominal, cs);
  EXPECT_NEAR(out.stages[0][0], 1.0, 1e-15);
  EXPECT_NEAR(out.nu[0], 2.0, 1e-15);
  EXPECT_FALSE(out.joint);
}

TEST(SequentialFilter, FallsBackToJointProjection) {
  // nu1 >= 1 and nu1 + nu2 <= 0 from the origin: the second projection
  // breaks the first, the exact answer is (1, -1).
  const std::vector<HalfSpace> cs{{-1.0, {1.0, 0.0}}, {0.0, {-1.0, -1.0}}};
  const std::vector<double> nominal{0.0, 0.0};
  const auto out = filter_sequential(nominal, cs);
  EXPECT_TRUE(out.joint);
  EXPECT_NEAR(out.nu[0], 1.0, 1e-12);
  EXPECT_NEAR(out.nu[1], -1.0, 1e-12);
  for (const auto& c : cs) EXPECT_GE(c.residual(out.nu), -1e-9);
}

TEST(ProjectIntersection, MatchesBruteForceForTwoConstraints) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    std::vector<HalfSpace> cs{{u(rng), {u(rng), u(rng)}}, {u(rng), {u(rng), u(rng)}}};
    const std::vector<double> nominal{u(rng), u(rng)};
    std::vector<double> nu;
    try {
      nu = project_intersection(nominal, cs);
    } catch (const InfeasibleError&) {
      continue;  // parallel, opposing half-spaces
    }
    double best = 1e300;
    std::vector<double> arg;
    for (int a = 0; a <= 800; ++a)
      for (int b = 0; b <= 800; ++b) {
        const std::vector<double> p{-8 + 0.02 * a, -8 + 0.02 * b};
        if (cs[0].residual(p) < 0 || cs[1].residual(p) < 0) continue;
        const double f = testing::qp_objective(p, nominal);
        if (f < best) best = f, arg = p;
      }
    if (arg.empty()) continue;
    for (const auto& c : cs) ASSERT_GE(c.residual(nu), -1e-9);
    ASSERT_LE(testing::qp_objective(nu, nominal), best + 1e-9);
    // Strong convexity: an optimal nu satisfies |p - nu|^2 <= f(p) - f(nu) for feasible p.
    const double gap = best - testing::qp_objective(nu, nominal);
    const double dist2 = (arg[0] - nu[0]) * (arg[0] - nu[0]) + (arg[1] - nu[1]) * (arg[1] - nu[1]);
    ASSERT_LE(dist2, gap + 1e-9);
  }
}

TEST(ProjectIntersection, EmptyIntersectionThrows) {
  const std::vector<HalfSpace> cs{{-1.0, {1.0}}, {-1.0, {-1.0}}};  // nu >= 1 and nu <= -1
  const std::vector<double> nominal{0.0};
  EXPECT_THROW(project_intersection(nominal, cs), InfeasibleError);
}

}  // namespace
}  // namespace pcbf
