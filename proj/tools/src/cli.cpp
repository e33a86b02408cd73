#include "pcbf_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <nlohmann/json.hpp>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "pcbf/error.hpp"
#include "pcbf/scenario.hpp"
#include "pcbf_cli/svg.hpp"

namespace pcbf::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

/// JSON has no infinity; monitors that never saw a sample are reported as null.
ordered_json finite_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json conditions_json(const CompiledScenario& sc, const std::vector<ConditionReport>& reports) {
  ordered_json arr = ordered_json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    ordered_json one{{"verdict", to_string(r.one.verdict)},
                     {"samples", r.one.samples},
                     {"degenerate", r.one.degenerate},
                     {"min_gain_norm", finite_or_null(r.one.min_gain_norm)}};
    if (r.one.counterexample) one["counterexample"] = *r.one.counterexample;
    arr.push_back({{"barrier", sc.spec.safety[k].name},
                   {"passed", r.passed()},
                   {"one", one},
                   {"two",
                    {{"verdict", to_string(r.two.verdict)},
                     {"supremum", r.two.supremum},
                     {"bound", r.two.bound},
                     {"margin", r.two.margin}}},
                   {"three", {{"verdict", to_string(r.three.verdict)}, {"y0", r.three.y0}, {"b", r.three.barriers}}}});
  }
  return arr;
}

struct Overrides {
  std::string controller;
  std::optional<double> dt, horizon, hold_dt;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

CompiledScenario compile(const std::string& name_or_path, const Overrides& o) {
  ScenarioSpec spec = load_scenario(name_or_path);
  if (o.seed) spec.seed = *o.seed;
  return compile_scenario(spec, o.controller);
}

SimOptions sim_options(const Overrides& o) {
  SimOptions opt;
  opt.dt = o.dt;
  opt.horizon = o.horizon;
  opt.hold_dt = o.hold_dt;
  opt.force = o.force;
  return opt;
}

struct RunOutcome {
  int code = kOk;
  std::string text;
  std::string diagnostics;
  std::string error;
};

RunOutcome run_one(const std::string& scenario, const Overrides& o, const std::string& csv_path) {
  RunOutcome r;
  try {
    const CompiledScenario sc = compile(scenario, o);
    const SimResult res = simulate(sc, sim_options(o));
    std::string written;
    if (!res.trace.rows.empty()) {
      if (!csv_path.empty()) {
        const fs::path p(csv_path);
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        write_csv(res.trace, csv_path);
        written = csv_path;
      }
    }
    r.text = format_summary(res, written);
    if (res.verdict == RunVerdict::Aborted && res.trace.rows.empty() && !o.force) {
      // Refused before integrating: the feasibility conditions failed.
      r.diagnostics = format_conditions(sc, res.conditions);
      r.code = kCheckFailed;
    } else {
      r.code = exit_code(res.verdict);
    }
  } catch (const Error& e) {
    r.error = e.what();
    r.code = kUsage;
  } catch (const std::exception& e) {
    r.error = e.what();
    r.code = kUsage;
  }
  return r;
}

std::vector<std::string> batch_files(const std::string& dir) {
  if (!fs::is_directory(dir)) throw IoError("'" + dir + "' is not a directory");
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no .json scenarios in '" + dir + "'");
  return files;
}

std::string first_present(const SimTrace& trace, std::initializer_list<std::string> names) {
  for (const auto& n : names) {
    if (trace.has_column(n)) return n;
  }
  std::string all;
  for (const auto& n : names) all += (all.empty() ? "" : " or ") + n;
  throw SpecError("trace has no column " + all);
}

std::vector<Panel> build_panels(const SimTrace& trace, const std::vector<double>& bounds) {
  if (trace.rows.empty()) throw IoError("trace has no rows");
  if (trace.columns.size() < 2 || trace.columns[0] != "t") throw SpecError("trace has no leading 't' column");
  const auto t = trace.column("t");
  const std::string x = trace.columns[1];
  const bool deg = trace.has_column(x + "_deg") && trace.has_column("xd_deg");
  const std::string xd = deg ? "xd_deg" : first_present(trace, {"xd", "xd_" + x});

  Panel state{x + " vs t", "t", deg ? x + " (deg)" : x, {}, bounds};
  state.series.push_back({x, t, trace.column(deg ? x + "_deg" : x), "#1f77b4", false});
  state.series.push_back({"reference", t, trace.column(xd), "#2ca02c", true});

  const std::string e = first_present(trace, {"e", "e_1"});
  const auto rho = trace.column("rho");
  std::vector<double> neg(rho.size());
  std::transform(rho.begin(), rho.end(), neg.begin(), [](double v) { return -v; });
  Panel error{"tracking error and funnel", "t", e, {}, {}};
  error.series.push_back({e, t, trace.column(e), "#1f77b4", false});
  error.series.push_back({"+rho", t, rho, "#d62728", true});
  error.series.push_back({"-rho", t, neg, "#d62728", true});

  const std::string u = first_present(trace, {"u", "u_1"});
  Panel input{"control input", "t", u, {{u, t, trace.column(u), "#ff7f0e", false}}, {}};

  Panel barrier{"safety function", "t", "h", {{"h", t, trace.column("h"), "#9467bd", false}}, {0.0}};
  return {state, error, input, barrier};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  f << text;
}

int cmd_scenarios(std::ostream& out) {
  for (const auto& name : builtin_scenario_names()) {
    const auto spec = builtin_scenario(name);
    out << name << "\t" << spec->description << "\n";
  }
  return kOk;
}

int cmd_check(const std::string& scenario, const Overrides& o, bool as_json, std::ostream& out) {
  const CompiledScenario sc = compile(scenario, o);
  const auto reports = check_scenario(sc);
  bool ok = std::all_of(reports.begin(), reports.end(), [](const ConditionReport& r) { return r.passed(); });
  if (as_json) {
    ordered_json j{{"scenario", sc.spec.name},
                   {"controller", sc.controller_name},
                   {"passed", ok},
                   {"barriers", conditions_json(sc, reports)}};
    out << j.dump(2) << "\n";
  } else {
    out << "scenario " << sc.spec.name << ", controller " << sc.controller_name << "\n";
    out << format_conditions(sc, reports);
    out << (ok ? "all conditions pass\n" : "conditions FAIL\n");
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_run(const std::vector<std::string>& scenarios, bool batch, const Overrides& o, const std::string& out_path,
            std::ostream& out, std::ostream& err) {
  if (!batch) {
    const RunOutcome r = run_one(scenarios.front(), o, out_path);
    if (!r.error.empty()) err << "error: " << r.error << "\n";
    err << r.diagnostics;
    out << r.text;
    return r.code;
  }
  // Batch: every scenario in its own task, traces in out_path/<stem>.csv.
  const fs::path dir = out_path.empty() ? fs::path(".") : fs::path(out_path);
  std::vector<std::future<RunOutcome>> jobs;
  for (const auto& s : scenarios) {
    const std::string csv = (dir / (fs::path(s).stem().string() + ".csv")).string();
    jobs.push_back(std::async(std::launch::async, run_one, s, o, csv));
  }
  int worst = kOk;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunOutcome r = jobs[i].get();
    out << "== " << scenarios[i] << "\n";
    if (!r.error.empty()) err << scenarios[i] << ": error: " << r.error << "\n";
    err << r.diagnostics;
    out << r.text;
    worst = std::max(worst, r.code);
  }
  return worst;
}

int cmd_plot(const std::string& csv, const std::string& out_dir, const std::vector<double>& bounds, std::ostream& out) {
  const SimTrace trace = read_csv(csv);
  const auto panels = build_panels(trace, bounds);  // validates before anything is written
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  const char* names[] = {"state.svg", "error.svg", "input.svg", "barrier.svg"};
  std::vector<std::pair<fs::path, std::string>> files;
  for (std::size_t i = 0; i < panels.size(); ++i) files.emplace_back(dir / names[i], render_svg({panels[i]}));
  files.emplace_back(dir / "panels.svg", render_svg(panels));
  for (const auto& [path, text] : files) {
    write_text(path, text);
    out << path.string() << "\n";
  }
  return kOk;
}

}  // namespace

int exit_code(RunVerdict v) noexcept {
  switch (v) {
    case RunVerdict::Safe: return kOk;
    case RunVerdict::Unsafe: return kUnsafe;
    case RunVerdict::Aborted: return kAborted;
  }
  return kAborted;
}

std::string format_conditions(const CompiledScenario& sc, const std::vector<ConditionReport>& reports) {
  std::ostringstream o;
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    o << "barrier " << sc.spec.safety[k].name << "\n";
    o << "  (i)   " << to_string(r.one.verdict);
    if (r.one.verdict != Verdict::Skipped) {
      o << "  samples in safe set " << r.one.samples << ", degenerate " << r.one.degenerate << ", min |Lg0 h| "
        << num(r.one.min_gain_norm);
      if (r.one.counterexample) {
        o << ", counterexample x =";
        for (double v : *r.one.counterexample) o << ' ' << num(v);
      }
    }
    o << "\n  (ii)  " << to_string(r.two.verdict);
    if (r.two.verdict != Verdict::Skipped) {
      o << "  sup " << num(r.two.supremum) << " vs bound " << num(r.two.bound) << ", margin " << num(r.two.margin);
    }
    o << "\n  (iii) " << to_string(r.three.verdict) << "  y0(0) = " << num(r.three.y0);
    for (std::size_t i = 0; i < r.three.barriers.size(); ++i) o << ", b" << i + 1 << "(0) = " << num(r.three.barriers[i]);
    o << "\n";
  }
  return o.str();
}

std::string format_summary(const SimResult& res, const std::string& trace_path) {
  const Monitors& m = res.monitors;
  ordered_json j{{"scenario", res.scenario},
                 {"controller", res.controller},
                 {"verdict", to_string(res.verdict)},
                 {"min_h", finite_or_null(m.min_h)},
                 {"min_h_each", ordered_json::array()},
                 {"max_error_over_rho", finite_or_null(m.max_error_ratio)},
                 {"max_error_excess", finite_or_null(m.max_error_excess)},
                 {"min_constraint_residual", finite_or_null(m.min_constraint_residual)},
                 {"constraint_violations", m.constraint_violations},
                 {"joint_projections", m.joint_projections},
                 {"max_nu_rate", m.max_nu_rate},
                 {"max_abs_mu", m.max_abs_mu},
                 {"rows", res.trace.size()},
                 {"wall_seconds", res.wall_seconds}};
  for (double v : m.min_h_each) j["min_h_each"].push_back(finite_or_null(v));
  if (!trace_path.empty()) j["trace"] = trace_path;
  if (!res.failure.empty()) j["failure"] = res.failure;
  if (!res.warnings.empty()) j["warnings"] = res.warnings;
  return j.dump(2) + "\n";
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proxy barrier safe-control toolkit"};
  app.require_subcommand(1);

  Overrides o;
  std::string scenario, batch_dir, out_path, csv;
  bool as_json = false;
  std::vector<double> bounds;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* c) {
    c->add_option("--controller", o.controller, "Controller key from the scenario (default: scenario default)");
    c->add_option("--seed", seed, "Seed for the randomized condition (i) sampler");
  };

  auto* scen = app.add_subcommand("scenarios", "List built-in scenarios");

  auto* check = app.add_subcommand("check", "Report the feasibility conditions at the initial state");
  check->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  check->add_flag("--json", as_json, "Machine-readable output");
  add_common(check);

  auto* runc = app.add_subcommand("run", "Simulate and write a CSV trace");
  runc->add_option("scenario", scenario, "Built-in name or JSON file");
  runc->add_option("--batch", batch_dir, "Run every .json scenario in a directory concurrently");
  runc->add_option("--out", out_path, "CSV path (batch: output directory)");
  runc->add_option("--dt", o.dt, "Integration step");
  runc->add_option("--horizon", o.horizon, "Final time");
  runc->add_option("--hold-dt", o.hold_dt, "Zero-order hold period for nu and u (0: continuous)");
  runc->add_flag("--force", o.force, "Simulate even when the feasibility conditions fail");
  add_common(runc);

  auto* plot = app.add_subcommand("plot", "Render SVG panels from a CSV trace");
  plot->add_option("trace", csv, "CSV trace written by run")->required();
  plot->add_option("--out", out_path, "Output directory")->default_val("plots");
  plot->add_option("--bound", bounds, "Safe-set boundary drawn on the state panel (repeatable)");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }
  if (seed != 0) o.seed = seed;

  try {
    if (scen->parsed()) return cmd_scenarios(out);
    if (check->parsed()) return cmd_check(scenario, o, as_json, out);
    if (runc->parsed()) {
      if (scenario.empty() == batch_dir.empty()) {
        err << "error: run needs exactly one of <scenario> or --batch <dir>\n";
        return kUsage;
      }
      if (batch_dir.empty()) return cmd_run({scenario}, false, o, out_path, out, err);
      return cmd_run(batch_files(batch_dir), true, o, out_path, out, err);
    }
    if (plot->parsed()) return cmd_plot(csv, out_path, bounds, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace pcbf::cli
