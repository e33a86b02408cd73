// Declarative scenario description (JSON) and its compilation into the
// symbolic and numeric objects a simulation needs.
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcbf/barrier.hpp"
#include "pcbf/controllers.hpp"
#include "pcbf/dob.hpp"
#include "pcbf/plant.hpp"

namespace pcbf {

enum class ControllerKind { Proxy, Ppc, Nussbaum, DobBackstepping };
const char* to_string(ControllerKind k) noexcept;
/// "proxy", "ppc", "nussbaum", "dob_backstepping"; throws SpecError otherwise.
ControllerKind parse_controller_kind(std::string_view name);

// Expressions are kept as source text so a spec round-trips exactly.

struct PlantSource {
  std::vector<std::string> x;
  std::vector<std::vector<std::string>> z;
  std::size_t inputs = 1;
  std::vector<std::string> f0;
  std::vector<std::vector<std::string>> g0;
  std::vector<std::vector<std::string>> f;
  std::vector<std::vector<std::vector<std::string>>> g;
  std::vector<std::vector<std::string>> disturbances;  // empty, or one (possibly empty) block per level
  std::vector<double> omega;
  bool operator==(const PlantSource&) const = default;
};

struct SafetySource {
  std::string name;
  std::string h;
  double xi = 1.0;
  BarrierMode mode = BarrierMode::Switched;
  std::vector<double> lambda;  // lambda_1..lambda_{m+1}
  std::vector<double> beta;    // beta_1..beta_m
  std::vector<double> box_lower, box_upper;
  std::size_t samples = 20001;
  double gain_tolerance = 1e-8;
  bool operator==(const SafetySource&) const = default;
};

struct PpcSource {
  std::vector<double> k;
  std::vector<int> sign;
  std::vector<RhoSpec> funnels;
  bool auto_initialize = true;
  double margin = 1.5;
  double floor = 0.1;
  bool operator==(const PpcSource&) const = default;
};

struct NussbaumSource {
  double gamma1 = 1.0;
  double gamma2 = 0.0;
  double k = 1.0;
  std::vector<std::string> regressor;
  double zeta0 = 0.0;
  std::vector<double> theta0;
  bool operator==(const NussbaumSource&) const = default;
};

struct DobBackstepSource {
  DobSpec observer;
  std::vector<double> k;
  std::vector<double> gamma_f;
  std::vector<double> sigma;
  std::size_t node_cap = 2'000'000;
  bool operator==(const DobBackstepSource&) const = default;
};

struct ControllerSource {
  std::size_t chain_length = 1;  // m
  std::vector<double> lambda;    // when nonempty, replaces every barrier's lambda
  std::vector<double> beta;      // likewise for beta
  bool filter = true;            // false: apply nu_d without the safety filter
  std::vector<double> nominal_k; // k_0..k_m
  std::vector<double> nominal_c; // c_0..c_m
  PpcSource ppc;
  NussbaumSource nussbaum;
  DobBackstepSource dob;
  bool operator==(const ControllerSource&) const = default;
};

struct ScenarioSpec {
  std::string name;
  std::string description;
  std::map<std::string, double> parameters;  // named constants usable in every expression
  PlantSource plant;
  std::vector<SafetySource> safety;
  RhoSpec rho;
  std::string reference_units = "rad";  // "rad" or "deg"
  std::vector<std::string> reference;   // x_d(t), one per x component
  std::vector<double> x0;
  std::vector<std::vector<double>> z0;
  double horizon = 10.0;
  double dt = 1e-3;
  double hold_dt = 0.0;  // > 0: zero-order hold of nu and u at this period
  std::string controller;  // default controller key
  std::map<std::string, ControllerSource> controllers;  // keyed by kind name
  std::uint64_t seed = 1;
  bool operator==(const ScenarioSpec&) const = default;
};

/// Parses and validates the JSON text. Schema violations raise SpecError
/// naming the offending key path; expression errors name the path and the
/// byte offset inside the expression.
ScenarioSpec scenario_from_json(std::string_view text);
std::string scenario_to_json(const ScenarioSpec& spec);
ScenarioSpec load_scenario_file(const std::filesystem::path& path);
/// A built-in name or a path to a JSON file.
ScenarioSpec load_scenario(std::string_view name_or_path);

std::vector<std::string> builtin_scenario_names();
std::optional<ScenarioSpec> builtin_scenario(std::string_view name);
std::optional<std::string_view> builtin_scenario_source(std::string_view name);

/// Everything a run needs, built once.
struct CompiledScenario {
  ScenarioSpec spec;
  std::string controller_name;
  ControllerKind kind = ControllerKind::Proxy;
  ControllerSource control;
  PlantSpec plant;
  PlantModel model;
  ExprVec reference;  // radians
  std::vector<ProxySpec> proxies;
  std::vector<BarrierStack> stacks;
  NominalController nominal;
  std::optional<PpcController> ppc;
  std::optional<NussbaumController> nussbaum;
  std::optional<DobBacksteppingController> dob_backstepping;
  std::vector<SamplerBox> boxes;

  std::size_t chain_length() const noexcept { return control.chain_length; }
  std::size_t virtual_dim() const { return plant.block_dim(0); }
  /// x(0) followed by z(0).
  std::vector<double> initial_state() const;
  /// mu_1(0) = z_1(0), mu_i(0) = 0.
  std::vector<double> initial_virtual_state() const;
};

/// Builds the plant, barrier stacks and controllers. An empty controller
/// name selects the scenario default.
CompiledScenario compile_scenario(const ScenarioSpec& spec, std::string_view controller = {});

/// Parses an expression and substitutes the scenario parameters.
Expr parse_with_parameters(std::string_view source, const std::map<std::string, double>& parameters);

}  // namespace pcbf
