#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pcbf/dob.hpp"
#include "pcbf/error.hpp"
#include "pcbf/sim.hpp"

namespace pcbf {
namespace {

DobSpec scalar_spec(double alpha) { return DobSpec{{alpha}, {1.0}, {}}; }

// Plant dz/dt = d(t) with no known dynamics, observed by a one-level DOB.
// State: [z, s].
struct ScalarObserverRun {
  DobSpec spec;
  std::function<double(double)> d;

  double estimate_at(double t_end, double dt) const {
    const double alpha = spec.alpha[0];
    OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
      DobChainState st{{{y[1]}}, {{y[1] + alpha * y[0]}}, {{}}};
      const auto ds = dob_derivative(spec, st, {{0.0}});
      dy[0] = d(t);
      dy[1] = ds[0][0];
    };
    std::vector<double> y{0.0, 0.0};
    const auto init = initial_dob_state(spec, {{0.0}});
    y[1] = init.s[0][0];
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < steps; ++k) y = rk4_step(rhs, k * dt, y, dt);
    return y[1] + alpha * y[0];
  }
};

TEST(Dob, ZeroPlantAndEstimateIsEquilibrium) {
  const DobSpec spec = scalar_spec(30);
  const auto st = initial_dob_state(spec, {{0.0}});
  const auto ds = dob_derivative(spec, st, {{0.0}});
  EXPECT_EQ(ds[0][0], 0.0);
}

TEST(Dob, InitialEstimateIsZero) {
  const DobSpec spec{{30, 20}, {1, 1}, {{100}}};
  const auto st = initial_dob_state(spec, {{0.7}, {-1.2}});
  EXPECT_DOUBLE_EQ(st.s[0][0], -21.0);
  EXPECT_DOUBLE_EQ(st.s[1][0], 24.0);
  EXPECT_EQ(st.estimate[0][0], 0.0);
  EXPECT_EQ(st.estimate[1][0], 0.0);
  EXPECT_EQ(st.filtered[0][0][0], 0.0);
  EXPECT_TRUE(st.filtered[1].empty());
}

TEST(Dob, ConstantDisturbanceErrorDecaysExponentially) {
  const ScalarObserverRun run{scalar_spec(30), [](double) { return 1.0; }};
  const double dhat = run.estimate_at(0.2, 1e-3);
  EXPECT_NEAR(dhat, 1 - std::exp(-6.0), 1e-8);
  EXPECT_NEAR(dhat, 0.99752, 1e-5);
}

TEST(Dob, SinusoidTrackingErrorMatchesFirstOrderBand) {
  const double alpha = 30;
  const ScalarObserverRun run{scalar_spec(alpha), [](double t) { return std::sin(t); }};
  const double band = 1 / std::sqrt(alpha * alpha + 1) + 1e-3;
  for (double t = 5.0; t <= 8.0; t += 0.25) EXPECT_LE(std::abs(run.estimate_at(t, 1e-3) - std::sin(t)), band) << t;
}

TEST(Dob, OutputMapIsRecomputedNotIntegrated) {
  const DobSpec spec{{30, 20}, {1, 1}, {{100}}};
  auto st = initial_dob_state(spec, {{0.0}, {0.0}});
  st.s = {{0.3}, {-0.4}};
  const std::vector<Block> z{{0.25}, {2.0}};
  refresh_estimates(spec, st, z);
  EXPECT_EQ(st.estimate[0][0] - st.s[0][0] - 30 * 0.25, 0.0);
  EXPECT_EQ(st.estimate[1][0] - st.s[1][0] - 20 * 2.0, 0.0);
}

TEST(Dob, DerivativeMatchesObserverLaw) {
  const DobSpec spec{{30, 20}, {1, 1}, {{100}}};
  DobChainState st{{{0.1}, {0.2}}, {{0.5}, {-0.3}}, {{{0.4}}, {}}};
  const auto ds = dob_derivative(spec, st, {{1.5}, {-2.0}});
  EXPECT_DOUBLE_EQ(ds[0][0], -30 * (1.5 + 0.5));
  EXPECT_DOUBLE_EQ(ds[1][0], -20 * (-2.0 - 0.3));
}

TEST(Filter, EquilibriumWhenStageEqualsInput) {
  const DobSpec spec{{30, 20}, {1, 1}, {{100}}};
  DobChainState st{{{0.0}, {0.0}}, {{0.8}, {0.0}}, {{{0.8}}, {}}};
  EXPECT_EQ(filter_derivative(spec, st)[0][0][0], 0.0);
}

TEST(Filter, DerivativeMatchesLowPassLaw) {
  const DobSpec spec{{30, 30, 30}, {1, 1, 1}, {{100, 50}, {70}}};
  DobChainState st{{{0}, {0}, {0}}, {{1.0}, {2.0}, {0}}, {{{0.5}, {0.1}}, {{1.5}}, {}}};
  const auto df = filter_derivative(spec, st);
  EXPECT_DOUBLE_EQ(df[0][0][0], -100 * (0.5 - 1.0));
  EXPECT_DOUBLE_EQ(df[0][1][0], -50 * (0.1 - 0.5));
  EXPECT_DOUBLE_EQ(df[1][0][0], -70 * (1.5 - 2.0));
  EXPECT_TRUE(df[2].empty());
}

// Integrates only the filter stages of level 1 with the raw estimate held at c.
std::vector<double> filter_step_response(const DobSpec& spec, double c, double t_end, double dt) {
  const std::size_t stages = spec.time_constants[0].size();
  OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
    DobChainState st;
    st.s.assign(spec.levels(), {0.0});
    st.estimate.assign(spec.levels(), {0.0});
    st.estimate[0] = {c};
    st.filtered.resize(spec.levels());
    for (std::size_t i = 0; i + 1 < spec.levels(); ++i) st.filtered[i].assign(spec.time_constants[i].size(), {0.0});
    for (std::size_t j = 0; j < stages; ++j) st.filtered[0][j] = {y[j]};
    const auto df = filter_derivative(spec, st);
    for (std::size_t j = 0; j < stages; ++j) dy[j] = df[0][j][0];
  };
  std::vector<double> y(stages, 0.0);
  const int steps = static_cast<int>(std::lround(t_end / dt));
  for (int k = 0; k < steps; ++k) y = rk4_step(rhs, k * dt, y, dt);
  return y;
}

TEST(Filter, StepResponseIsFirstOrder) {
  const DobSpec spec{{30, 30}, {1, 1}, {{30}}};
  const auto y = filter_step_response(spec, 1.0, 0.2, 1e-3);
  EXPECT_NEAR(y[0], 1 - std::exp(-6.0), 1e-8);
}

TEST(Filter, FastStageMatchesRk4Recurrence) {
  // For y' = -T (y - 1) one RK4 step multiplies the error by the degree-4
  // Taylor polynomial of exp(-T dt); the exact response is reached to
  // within the resulting truncation error.
  const double T = 100, dt = 1e-3;
  const int n = 50;
  const DobSpec spec{{30, 30}, {1, 1}, {{T}}};
  const auto y = filter_step_response(spec, 1.0, n * dt, dt);
  const double z = -T * dt;
  const double r = 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24;
  const double discrete = 1 - std::pow(r, n);
  EXPECT_NEAR(y[0], discrete, 1e-14);
  EXPECT_NEAR(y[0], 1 - std::exp(-T * n * dt), std::abs(discrete - (1 - std::exp(-5.0))) + 1e-15);
  EXPECT_LT(std::abs(discrete - (1 - std::exp(-5.0))), 5e-8);
}

TEST(Filter, CascadeApproachesInputMonotonically) {
  const double T = 100;
  const DobSpec spec{{30, 30, 30}, {1, 1, 1}, {{T, T}, {T}}};
  double prev = 0.0;
  for (int k = 1; k <= 50; ++k) {
    const double t = k * 1e-3;
    const auto y = filter_step_response(spec, 2.0, t, 1e-4);
    ASSERT_GE(y[1], prev);
    ASSERT_LE(y[1], 2.0);
    prev = y[1];
  }
  // Two identical stages: 1 - (1 + T t) exp(-T t) at T t = 5.
  EXPECT_NEAR(prev, 2.0 * (1 - 6 * std::exp(-5.0)), 1e-6);
  EXPECT_LT(2.0 - prev, 1e-2 * 2.0 * 5);
}

TEST(Filter, DcFidelityWithFullObserver) {
  // No known dynamics, constant disturbance d on every level: every estimate
  // and filtered estimate reaches d within 1% after seven time constants.
  const DobSpec spec{{30, 20, 40}, {1, 1, 1}, {{100, 80}, {60}}};
  const double d = -0.7;
  const std::size_t n = spec.levels();
  // State: z_i (driven only by d), s_i, then the three filter stages.
  OdeRhs full = [&](double, std::span<const double> y, std::span<double> dy) {
    DobChainState st;
    for (std::size_t i = 0; i < n; ++i) {
      st.s.push_back({y[n + i]});
      st.estimate.push_back({y[n + i] + spec.alpha[i] * y[i]});
    }
    st.filtered = {{{y[2 * n]}, {y[2 * n + 1]}}, {{y[2 * n + 2]}}, {}};
    const auto ds = dob_derivative(spec, st, {{0.0}, {0.0}, {0.0}});
    const auto df = filter_derivative(spec, st);
    for (std::size_t i = 0; i < n; ++i) {
      dy[i] = d;
      dy[n + i] = ds[i][0];
    }
    dy[2 * n] = df[0][0][0];
    dy[2 * n + 1] = df[0][1][0];
    dy[2 * n + 2] = df[1][0][0];
  };
  std::vector<double> y(2 * n + 3, 0.0);
  const double slowest = 1.0 / 20.0;
  const double dt = 1e-4;
  const int steps = static_cast<int>(std::lround(7 * slowest / dt)) + static_cast<int>(std::lround(7 * 0.05 / dt));
  for (int k = 0; k < steps; ++k) y = rk4_step(full, k * dt, y, dt);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y[n + i] + spec.alpha[i] * y[i], d, 0.01 * std::abs(d));
  for (std::size_t j = 2 * n; j < y.size(); ++j) EXPECT_NEAR(y[j], d, 0.01 * std::abs(d)) << j;
}

TEST(DobSpec, Validation) {
  EXPECT_NO_THROW((DobSpec{{30, 30}, {1, 1}, {{100}}}).validate());
  EXPECT_THROW((DobSpec{{30, 30}, {1, 60}, {{100}}}).validate(), SpecError);
  EXPECT_THROW((DobSpec{{30, -1}, {1, 1}, {{100}}}).validate(), SpecError);
  EXPECT_THROW((DobSpec{{30, 30}, {1, 1}, {{100, 5}}}).validate(), SpecError);
  EXPECT_THROW((DobSpec{{30, 30}, {1, 1}, {{0}}}).validate(), SpecError);
  EXPECT_THROW((DobSpec{{30, 30}, {1}, {{100}}}).validate(), SpecError);
  EXPECT_DOUBLE_EQ((DobSpec{{30, 30}, {1, 1}, {{100}}}).kappa(1), 29.5);
}

}  // namespace
}  // namespace pcbf
