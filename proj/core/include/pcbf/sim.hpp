// Fixed-step closed-loop simulation of plant, virtual chain, observer,
// filters and adaptive states as one ODE.
#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcbf/barrier.hpp"
#include "pcbf/scenario.hpp"

namespace pcbf {

inline constexpr double kSafetyTolerance = 1e-6;
inline constexpr double kFunnelTolerance = 1e-9;

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/// One classical Runge-Kutta step.
std::vector<double> rk4_step(const OdeRhs& f, double t, std::span<const double> y, double dt);

/// Column-oriented log on a uniform time grid.
struct SimTrace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool has_column(std::string_view name) const noexcept;
  /// Throws SpecError naming the column when it is absent.
  std::size_t column_index(std::string_view name) const;
  std::vector<double> column(std::string_view name) const;
};

enum class RunVerdict { Safe, Unsafe, Aborted };
const char* to_string(RunVerdict v) noexcept;

struct Monitors {
  double min_h = 0.0;                            // over all barriers and time
  std::vector<double> min_h_each;                // per barrier
  double max_error_excess = 0.0;                 // max_t ||e|| - rho
  double max_error_ratio = 0.0;                  // max_t ||e|| / rho
  std::vector<std::vector<double>> min_b;        // per barrier, b_0..b_m
  double min_constraint_residual = 0.0;          // min_t psi0 + psi1 . nu over barriers
  std::size_t constraint_violations = 0;         // steps with residual < -1e-9
  std::size_t joint_projections = 0;
  double max_nu_rate = 0.0;                      // max |nu(t_k+1) - nu(t_k)| / dt
  std::vector<double> max_abs_mu;                // per virtual level
};

struct SimOptions {
  std::string controller;  // empty: scenario default
  std::optional<double> dt;
  std::optional<double> horizon;
  std::optional<double> hold_dt;
  bool force = false;  // run even if the feasibility conditions fail
};

struct SimResult {
  std::string scenario;
  std::string controller;
  SimTrace trace;
  Monitors monitors;
  RunVerdict verdict = RunVerdict::Aborted;
  std::string failure;  // set when aborted
  std::vector<ConditionReport> conditions;  // one per barrier
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// Condition (i)-(iii) report for every barrier of a compiled scenario at
/// its initial state.
std::vector<ConditionReport> check_scenario(const CompiledScenario& scenario);

SimResult simulate(const CompiledScenario& scenario, const SimOptions& options = {});
SimResult simulate(const ScenarioSpec& spec, const SimOptions& options = {});

/// Total variation sum |y_{k+1} - y_k| of a column restricted to t in [t0, t1].
double total_variation(const SimTrace& trace, std::string_view column, double t0, double t1);

// CSV with a header row, 17 significant digits.
void write_csv(const SimTrace& trace, std::ostream& out);
void write_csv(const SimTrace& trace, const std::string& path);
SimTrace read_csv(std::istream& in);
SimTrace read_csv(const std::string& path);

}  // namespace pcbf
