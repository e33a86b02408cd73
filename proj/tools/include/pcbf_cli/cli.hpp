// Command-line front end: check, run, plot, scenarios.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pcbf/sim.hpp"

namespace pcbf::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kCheckFailed = 2,
  kUnsafe = 3,
  kAborted = 4,
};

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Human-readable condition report.
std::string format_conditions(const CompiledScenario& scenario, const std::vector<ConditionReport>& reports);
/// Machine-readable run summary (JSON object).
std::string format_summary(const SimResult& result, const std::string& trace_path);

int exit_code(RunVerdict v) noexcept;

}  // namespace pcbf::cli
