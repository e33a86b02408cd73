#include "pcbf/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pcbf/parser.hpp"

namespace pcbf {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_scenario_sources();
}

using json = nlohmann::ordered_json;

const char* to_string(ControllerKind k) noexcept {
  switch (k) {
    case ControllerKind::Proxy: return "proxy";
    case ControllerKind::Ppc: return "ppc";
    case ControllerKind::Nussbaum: return "nussbaum";
    case ControllerKind::DobBackstepping: return "dob_backstepping";
  }
  return "?";
}

ControllerKind parse_controller_kind(std::string_view name) {
  for (auto k : {ControllerKind::Proxy, ControllerKind::Ppc, ControllerKind::Nussbaum, ControllerKind::DobBackstepping}) {
    if (name == to_string(k)) return k;
  }
  throw SpecError("unknown controller '" + std::string(name) +
                  "' (expected proxy, ppc, nussbaum or dob_backstepping)");
}

// ---------------------------------------------------------------------------
// Reading

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SpecError("scenario " + (path.empty() ? std::string("/") : path) + ": " + what);
}

std::string join_path(const std::string& path, std::string_view key) { return path + "/" + std::string(key); }
std::string join_path(const std::string& path, std::size_t index) { return path + "/" + std::to_string(index); }

class Obj {
 public:
  Obj(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail(path_, "expected an object");
    for (const auto& [key, value] : j.items()) {
      if (!allowed.count(key)) fail(join_path(path_, key), "unknown key");
    }
  }

  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const {
    if (!j_.contains(key)) fail(join_path(path_, key), "required key is missing");
    return j_.at(key);
  }
  std::string path(const char* key) const { return join_path(path_, key); }

  double number(const char* key) const { return as_number(at(key), path(key)); }
  double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }
  std::size_t count(const char* key) const { return as_count(at(key), path(key)); }
  std::size_t count(const char* key, std::size_t fallback) const { return has(key) ? count(key) : fallback; }
  bool flag(const char* key, bool fallback) const {
    if (!has(key)) return fallback;
    if (!at(key).is_boolean()) fail(path(key), "expected true or false");
    return at(key).get<bool>();
  }
  std::string text(const char* key) const { return as_text(at(key), path(key)); }
  std::string text(const char* key, const std::string& fallback) const { return has(key) ? text(key) : fallback; }
  std::vector<double> numbers(const char* key) const { return as_numbers(at(key), path(key)); }
  std::vector<double> numbers_or_empty(const char* key) const { return has(key) ? numbers(key) : std::vector<double>{}; }
  std::vector<std::string> texts(const char* key) const { return as_texts(at(key), path(key)); }

  static double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }
  static std::size_t as_count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
      fail(path, "expected a nonnegative integer");
    }
    return j.get<std::size_t>();
  }
  static std::string as_text(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
  }
  static const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
  }
  static std::vector<double> as_numbers(const json& j, const std::string& path) {
    std::vector<double> out;
    std::size_t i = 0;
    for (const auto& v : as_array(j, path)) out.push_back(as_number(v, join_path(path, i++)));
    return out;
  }
  static std::vector<std::string> as_texts(const json& j, const std::string& path) {
    std::vector<std::string> out;
    std::size_t i = 0;
    for (const auto& v : as_array(j, path)) out.push_back(as_text(v, join_path(path, i++)));
    return out;
  }
  static std::vector<std::vector<std::string>> as_text_rows(const json& j, const std::string& path) {
    std::vector<std::vector<std::string>> out;
    std::size_t i = 0;
    for (const auto& v : as_array(j, path)) {
      out.push_back(as_texts(v, join_path(path, i)));
      ++i;
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
};

RhoSpec read_rho(const json& j, const std::string& path) {
  Obj o(j, path, {"initial", "steady", "decay"});
  RhoSpec r;
  r.initial = o.number("initial");
  r.steady = o.number("steady", r.initial);
  r.decay = o.number("decay", 0.0);
  try {
    r.validate();
  } catch (const SpecError& e) {
    fail(path, e.what());
  }
  return r;
}

PlantSource read_plant(const json& j, const std::string& path) {
  Obj o(j, path, {"x", "z", "inputs", "f0", "g0", "f", "g", "disturbances", "omega"});
  PlantSource p;
  p.x = o.texts("x");
  p.z = Obj::as_text_rows(o.at("z"), o.path("z"));
  p.inputs = o.count("inputs", 1);
  p.f0 = o.texts("f0");
  p.g0 = Obj::as_text_rows(o.at("g0"), o.path("g0"));
  p.f = Obj::as_text_rows(o.at("f"), o.path("f"));
  std::size_t i = 0;
  for (const auto& m : Obj::as_array(o.at("g"), o.path("g"))) {
    p.g.push_back(Obj::as_text_rows(m, join_path(o.path("g"), i++)));
  }
  if (o.has("disturbances")) p.disturbances = Obj::as_text_rows(o.at("disturbances"), o.path("disturbances"));
  p.omega = o.numbers_or_empty("omega");
  return p;
}

SafetySource read_safety(const json& j, const std::string& path) {
  Obj o(j, path, {"name", "h", "xi", "mode", "lambda", "beta", "box"});
  SafetySource s;
  s.name = o.text("name", "h");
  s.h = o.text("h");
  const std::string mode = o.text("mode", "switched");
  if (mode == "switched") {
    s.mode = BarrierMode::Switched;
  } else if (mode == "plain") {
    s.mode = BarrierMode::Plain;
  } else {
    fail(o.path("mode"), "expected \"switched\" or \"plain\"");
  }
  s.xi = o.number("xi", 1.0);
  s.lambda = o.numbers("lambda");
  s.beta = o.numbers("beta");
  if (o.has("box")) {
    Obj b(o.at("box"), o.path("box"), {"lower", "upper", "samples", "gain_tolerance"});
    s.box_lower = b.numbers("lower");
    s.box_upper = b.numbers("upper");
    s.samples = b.count("samples", s.samples);
    s.gain_tolerance = b.number("gain_tolerance", s.gain_tolerance);
  }
  return s;
}

ControllerSource read_controller(ControllerKind kind, const json& j, const std::string& path) {
  std::set<std::string> keys{"chain_length", "lambda", "beta", "filter", "nominal"};
  switch (kind) {
    case ControllerKind::Proxy: break;
    case ControllerKind::Ppc: keys.insert({"k", "sign", "funnels", "auto_initialize", "margin", "floor"}); break;
    case ControllerKind::Nussbaum: keys.insert({"gamma1", "gamma2", "k", "regressor", "zeta0", "theta0"}); break;
    case ControllerKind::DobBackstepping: keys.insert({"observer", "k", "gamma_f", "sigma", "node_cap"}); break;
  }
  Obj o(j, path, keys);
  ControllerSource c;
  c.chain_length = o.count("chain_length", 1);
  c.lambda = o.numbers_or_empty("lambda");
  c.beta = o.numbers_or_empty("beta");
  c.filter = o.flag("filter", true);
  Obj nom(o.at("nominal"), o.path("nominal"), {"k", "c"});
  c.nominal_k = nom.numbers("k");
  c.nominal_c = nom.numbers("c");
  switch (kind) {
    case ControllerKind::Proxy: break;
    case ControllerKind::Ppc: {
      c.ppc.k = o.numbers("k");
      std::size_t i = 0;
      for (const auto& v : Obj::as_array(o.at("sign"), o.path("sign"))) {
        const std::string p = join_path(o.path("sign"), i++);
        if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) fail(p, "expected 1 or -1");
        c.ppc.sign.push_back(v.get<int>());
      }
      if (o.has("funnels")) {
        i = 0;
        for (const auto& f : Obj::as_array(o.at("funnels"), o.path("funnels"))) {
          c.ppc.funnels.push_back(read_rho(f, join_path(o.path("funnels"), i++)));
        }
      }
      c.ppc.auto_initialize = o.flag("auto_initialize", true);
      c.ppc.margin = o.number("margin", 1.5);
      c.ppc.floor = o.number("floor", 0.1);
      break;
    }
    case ControllerKind::Nussbaum:
      c.nussbaum.gamma1 = o.number("gamma1");
      c.nussbaum.gamma2 = o.number("gamma2");
      c.nussbaum.k = o.number("k");
      c.nussbaum.regressor = o.texts("regressor");
      c.nussbaum.zeta0 = o.number("zeta0", 0.0);
      c.nussbaum.theta0 = o.numbers_or_empty("theta0");
      break;
    case ControllerKind::DobBackstepping: {
      Obj ob(o.at("observer"), o.path("observer"), {"alpha", "nu", "time_constants"});
      c.dob.observer.alpha = ob.numbers("alpha");
      c.dob.observer.nu = ob.numbers("nu");
      std::size_t i = 0;
      for (const auto& row : Obj::as_array(ob.at("time_constants"), ob.path("time_constants"))) {
        c.dob.observer.time_constants.push_back(Obj::as_numbers(row, join_path(ob.path("time_constants"), i++)));
      }
      c.dob.k = o.numbers("k");
      c.dob.gamma_f = o.numbers("gamma_f");
      c.dob.sigma = o.numbers("sigma");
      c.dob.node_cap = o.count("node_cap", c.dob.node_cap);
      break;
    }
  }
  return c;
}

}  // namespace

ScenarioSpec scenario_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SpecError(std::string("scenario: invalid JSON: ") + e.what());
  }
  Obj o(j, "", {"name", "description", "parameters", "plant", "safety", "rho", "reference", "initial", "simulation",
                "controller", "controllers", "seed"});
  ScenarioSpec s;
  s.name = o.text("name");
  s.description = o.text("description", "");
  if (o.has("parameters")) {
    const json& p = o.at("parameters");
    if (!p.is_object()) fail(o.path("parameters"), "expected an object");
    for (const auto& [key, value] : p.items()) s.parameters[key] = Obj::as_number(value, join_path(o.path("parameters"), key));
  }
  s.plant = read_plant(o.at("plant"), o.path("plant"));
  std::size_t i = 0;
  for (const auto& b : Obj::as_array(o.at("safety"), o.path("safety"))) {
    s.safety.push_back(read_safety(b, join_path(o.path("safety"), i++)));
  }
  s.rho = read_rho(o.at("rho"), o.path("rho"));
  {
    Obj r(o.at("reference"), o.path("reference"), {"units", "x"});
    s.reference_units = r.text("units", "rad");
    if (s.reference_units != "rad" && s.reference_units != "deg") fail(r.path("units"), "expected \"rad\" or \"deg\"");
    s.reference = r.texts("x");
  }
  {
    Obj r(o.at("initial"), o.path("initial"), {"x", "z"});
    s.x0 = r.numbers("x");
    i = 0;
    for (const auto& b : Obj::as_array(r.at("z"), r.path("z"))) s.z0.push_back(Obj::as_numbers(b, join_path(r.path("z"), i++)));
  }
  {
    Obj r(o.at("simulation"), o.path("simulation"), {"horizon", "dt", "hold_dt"});
    s.horizon = r.number("horizon");
    s.dt = r.number("dt");
    s.hold_dt = r.number("hold_dt", 0.0);
    if (!(s.horizon > 0.0)) fail(r.path("horizon"), "must be positive");
    if (!(s.dt > 0.0)) fail(r.path("dt"), "must be positive");
    if (!(s.hold_dt >= 0.0)) fail(r.path("hold_dt"), "must be nonnegative");
  }
  {
    const json& cs = o.at("controllers");
    if (!cs.is_object() || cs.empty()) fail(o.path("controllers"), "expected a nonempty object");
    for (const auto& [key, value] : cs.items()) {
      ControllerKind kind;
      try {
        kind = parse_controller_kind(key);
      } catch (const SpecError& e) {
        fail(join_path(o.path("controllers"), key), e.what());
      }
      s.controllers[key] = read_controller(kind, value, join_path(o.path("controllers"), key));
    }
  }
  s.controller = o.text("controller", s.controllers.begin()->first);
  if (!s.controllers.count(s.controller)) fail(o.path("controller"), "names a controller that is not configured");
  s.seed = o.has("seed") ? o.count("seed") : 1;
  return s;
}

// ---------------------------------------------------------------------------
// Writing

namespace {

json rho_json(const RhoSpec& r) { return json{{"initial", r.initial}, {"steady", r.steady}, {"decay", r.decay}}; }

}  // namespace

std::string scenario_to_json(const ScenarioSpec& s) {
  json j;
  j["name"] = s.name;
  if (!s.description.empty()) j["description"] = s.description;
  if (!s.parameters.empty()) {
    json p = json::object();
    for (const auto& [k, v] : s.parameters) p[k] = v;
    j["parameters"] = p;
  }
  json plant;
  plant["x"] = s.plant.x;
  plant["z"] = s.plant.z;
  plant["inputs"] = s.plant.inputs;
  plant["f0"] = s.plant.f0;
  plant["g0"] = s.plant.g0;
  plant["f"] = s.plant.f;
  plant["g"] = s.plant.g;
  if (!s.plant.disturbances.empty()) plant["disturbances"] = s.plant.disturbances;
  if (!s.plant.omega.empty()) plant["omega"] = s.plant.omega;
  j["plant"] = plant;

  json safety = json::array();
  for (const auto& b : s.safety) {
    json e;
    e["name"] = b.name;
    e["h"] = b.h;
    e["mode"] = b.mode == BarrierMode::Switched ? "switched" : "plain";
    e["xi"] = b.xi;
    e["lambda"] = b.lambda;
    e["beta"] = b.beta;
    if (!b.box_lower.empty() || !b.box_upper.empty()) {
      e["box"] = json{{"lower", b.box_lower},
                      {"upper", b.box_upper},
                      {"samples", b.samples},
                      {"gain_tolerance", b.gain_tolerance}};
    }
    safety.push_back(e);
  }
  j["safety"] = safety;
  j["rho"] = rho_json(s.rho);
  j["reference"] = json{{"units", s.reference_units}, {"x", s.reference}};
  j["initial"] = json{{"x", s.x0}, {"z", s.z0}};
  j["simulation"] = json{{"horizon", s.horizon}, {"dt", s.dt}, {"hold_dt", s.hold_dt}};
  j["controller"] = s.controller;

  json cs = json::object();
  for (const auto& [key, c] : s.controllers) {
    const ControllerKind kind = parse_controller_kind(key);
    json e;
    e["chain_length"] = c.chain_length;
    if (!c.lambda.empty()) e["lambda"] = c.lambda;
    if (!c.beta.empty()) e["beta"] = c.beta;
    e["filter"] = c.filter;
    e["nominal"] = json{{"k", c.nominal_k}, {"c", c.nominal_c}};
    switch (kind) {
      case ControllerKind::Proxy: break;
      case ControllerKind::Ppc: {
        e["k"] = c.ppc.k;
        e["sign"] = c.ppc.sign;
        json f = json::array();
        for (const auto& r : c.ppc.funnels) f.push_back(rho_json(r));
        e["funnels"] = f;
        e["auto_initialize"] = c.ppc.auto_initialize;
        e["margin"] = c.ppc.margin;
        e["floor"] = c.ppc.floor;
        break;
      }
      case ControllerKind::Nussbaum:
        e["gamma1"] = c.nussbaum.gamma1;
        e["gamma2"] = c.nussbaum.gamma2;
        e["k"] = c.nussbaum.k;
        e["regressor"] = c.nussbaum.regressor;
        e["zeta0"] = c.nussbaum.zeta0;
        if (!c.nussbaum.theta0.empty()) e["theta0"] = c.nussbaum.theta0;
        break;
      case ControllerKind::DobBackstepping:
        e["observer"] = json{{"alpha", c.dob.observer.alpha},
                             {"nu", c.dob.observer.nu},
                             {"time_constants", c.dob.observer.time_constants}};
        e["k"] = c.dob.k;
        e["gamma_f"] = c.dob.gamma_f;
        e["sigma"] = c.dob.sigma;
        e["node_cap"] = c.dob.node_cap;
        break;
    }
    cs[key] = e;
  }
  j["controllers"] = cs;
  j["seed"] = s.seed;
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Loading

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::vector<std::string> builtin_scenario_names() {
  std::vector<std::string> out;
  for (const auto& [name, text] : detail::builtin_scenario_sources()) out.emplace_back(name);
  return out;
}

std::optional<std::string_view> builtin_scenario_source(std::string_view name) {
  for (const auto& [n, text] : detail::builtin_scenario_sources()) {
    if (n == name) return text;
  }
  return std::nullopt;
}

std::optional<ScenarioSpec> builtin_scenario(std::string_view name) {
  if (auto text = builtin_scenario_source(name)) return scenario_from_json(*text);
  return std::nullopt;
}

ScenarioSpec load_scenario(std::string_view name_or_path) {
  const std::filesystem::path p{std::string(name_or_path)};
  if (std::filesystem::exists(p)) return load_scenario_file(p);
  if (auto s = builtin_scenario(name_or_path)) return *s;
  throw SpecError("no scenario file or built-in scenario named '" + std::string(name_or_path) + "'");
}

// ---------------------------------------------------------------------------
// Compilation

Expr parse_with_parameters(std::string_view source, const std::map<std::string, double>& parameters) {
  Expr e = parse(source);
  std::map<std::string, Expr, std::less<>> subs;
  for (const auto& v : free_variables(e)) {
    if (auto it = parameters.find(v); it != parameters.end()) subs.emplace(v, Expr::constant(it->second));
  }
  if (!subs.empty()) e = substitute(e, subs);
  return simplify(e);
}

namespace {

class ExprReader {
 public:
  explicit ExprReader(const std::map<std::string, double>& params) : params_(params) {}

  Expr one(const std::string& src, const std::string& path) const {
    try {
      return parse_with_parameters(src, params_);
    } catch (const ParseError& e) {
      fail(path, std::string(e.what()) + " in \"" + src + "\"");
    }
  }
  ExprVec vec(const std::vector<std::string>& src, const std::string& path) const {
    ExprVec out;
    for (std::size_t i = 0; i < src.size(); ++i) out.push_back(one(src[i], join_path(path, i)));
    return out;
  }
  ExprMat mat(const std::vector<std::vector<std::string>>& rows, const std::string& path) const {
    const std::size_t cols = rows.empty() ? 0 : rows[0].size();
    ExprMat m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != cols) fail(join_path(path, r), "matrix rows differ in length");
      for (std::size_t c = 0; c < cols; ++c) m(r, c) = one(rows[r][c], join_path(join_path(path, r), c));
    }
    return m;
  }

 private:
  const std::map<std::string, double>& params_;
};

}  // namespace

std::vector<double> CompiledScenario::initial_state() const {
  std::vector<double> s = spec.x0;
  for (const auto& b : spec.z0) s.insert(s.end(), b.begin(), b.end());
  return s;
}

std::vector<double> CompiledScenario::initial_virtual_state() const {
  const std::size_t p1 = virtual_dim();
  std::vector<double> mu(chain_length() * p1, 0.0);
  for (std::size_t k = 0; k < p1; ++k) mu[k] = spec.z0.at(0).at(k);
  return mu;
}

CompiledScenario compile_scenario(const ScenarioSpec& spec, std::string_view controller) {
  CompiledScenario c;
  c.spec = spec;
  c.controller_name = controller.empty() ? spec.controller : std::string(controller);
  auto it = spec.controllers.find(c.controller_name);
  if (it == spec.controllers.end()) {
    throw SpecError("scenario '" + spec.name + "' has no configuration for controller '" + c.controller_name + "'");
  }
  c.kind = parse_controller_kind(c.controller_name);
  c.control = it->second;
  const std::string cpath = "/controllers/" + c.controller_name;

  // Plant.
  const PlantSource& ps = spec.plant;
  for (const auto& [name, value] : spec.parameters) {
    if (symbols::is_reserved(name)) fail("/parameters/" + name, "name is reserved");
    if (!Expr::is_identifier(name)) fail("/parameters/" + name, "not a valid identifier");
  }
  const ExprReader rd(spec.parameters);
  c.plant.x_names = ps.x;
  c.plant.z_names = ps.z;
  c.plant.input_dim = ps.inputs;
  c.plant.f0 = rd.vec(ps.f0, "/plant/f0");
  c.plant.g0 = rd.mat(ps.g0, "/plant/g0");
  for (std::size_t i = 0; i < ps.f.size(); ++i) c.plant.f.push_back(rd.vec(ps.f[i], "/plant/f/" + std::to_string(i)));
  for (std::size_t i = 0; i < ps.g.size(); ++i) c.plant.g.push_back(rd.mat(ps.g[i], "/plant/g/" + std::to_string(i)));
  for (std::size_t i = 0; i < ps.disturbances.size(); ++i) {
    c.plant.disturbance.push_back(rd.vec(ps.disturbances[i], "/plant/disturbances/" + std::to_string(i)));
  }
  c.plant.omega = ps.omega;
  for (const auto& name : c.plant.state_names()) {
    if (spec.parameters.count(name)) fail("/parameters/" + name, "clashes with a state name");
  }
  try {
    c.model = PlantModel(c.plant);
  } catch (const SpecError& e) {
    fail("/plant", e.what());
  }

  // Initial state and reference.
  if (spec.x0.size() != c.plant.x_dim()) fail("/initial/x", "wrong length");
  if (spec.z0.size() != c.plant.levels()) fail("/initial/z", "need one block per level");
  for (std::size_t i = 0; i < spec.z0.size(); ++i) {
    if (spec.z0[i].size() != c.plant.block_dim(i)) fail("/initial/z/" + std::to_string(i), "wrong length");
  }
  if (spec.reference.size() != c.plant.x_dim()) fail("/reference/x", "need one entry per x component");
  const Expr scale = Expr::constant(spec.reference_units == "deg" ? std::numbers::pi / 180.0 : 1.0);
  for (std::size_t i = 0; i < spec.reference.size(); ++i) {
    c.reference.push_back(scale * rd.one(spec.reference[i], "/reference/x/" + std::to_string(i)));
  }

  // Barrier stacks.
  if (spec.safety.empty()) fail("/safety", "at least one safety constraint is required");
  const std::size_t m = c.control.chain_length;
  if (m == 0) fail(cpath + "/chain_length", "must be >= 1");
  for (std::size_t k = 0; k < spec.safety.size(); ++k) {
    const SafetySource& s = spec.safety[k];
    const std::string path = "/safety/" + std::to_string(k);
    ProxySpec proxy;
    proxy.state_names = c.plant.x_names;
    proxy.input_dim = c.plant.block_dim(0);
    proxy.chain_length = m;
    proxy.drift = c.plant.f0;
    proxy.input_gain = c.plant.g0;
    proxy.safety = rd.one(s.h, path + "/h");
    proxy.xi = s.xi;
    proxy.lambda = c.control.lambda.empty() ? s.lambda : c.control.lambda;
    proxy.beta = c.control.beta.empty() ? s.beta : c.control.beta;
    proxy.mode = s.mode;
    try {
      c.stacks.push_back(BarrierStack::build(proxy, spec.rho));
    } catch (const SpecError& e) {
      fail(path, e.what());
    }
    c.proxies.push_back(proxy);
    SamplerBox box;
    box.lower = s.box_lower;
    box.upper = s.box_upper;
    box.samples = s.samples;
    box.seed = spec.seed;
    box.gain_tolerance = s.gain_tolerance;
    if (s.mode == BarrierMode::Switched &&
        (box.lower.size() != c.plant.x_dim() || box.upper.size() != c.plant.x_dim())) {
      fail(path + "/box", "switched mode needs a sampler box with one bound per x component");
    }
    c.boxes.push_back(box);
  }

  // Nominal law.
  try {
    c.nominal = NominalController::build(c.proxies.front(), {c.control.nominal_k, c.control.nominal_c, c.reference});
  } catch (const SpecError& e) {
    fail(cpath + "/nominal", e.what());
  }

  const std::size_t n = c.plant.levels();
  switch (c.kind) {
    case ControllerKind::Proxy: break;
    case ControllerKind::Ppc: {
      if (c.plant.input_dim != 1) fail(cpath, "ppc needs a scalar input");
      for (std::size_t i = 0; i < n; ++i)
        if (c.plant.block_dim(i) != 1) fail(cpath, "ppc needs scalar z blocks");
      PpcGains g;
      g.k = c.control.ppc.k;
      g.sign = c.control.ppc.sign;
      g.funnels = c.control.ppc.funnels;
      g.auto_initialize = c.control.ppc.auto_initialize;
      g.margin = c.control.ppc.margin;
      g.floor = c.control.ppc.floor;
      try {
        g.validate(n);
        c.ppc = PpcController(g, spec.rho);
      } catch (const SpecError& e) {
        fail(cpath, e.what());
      }
      break;
    }
    case ControllerKind::Nussbaum: {
      if (n != 1 || c.plant.block_dim(0) != 1 || c.plant.input_dim != 1) {
        fail(cpath, "nussbaum needs a single scalar z block and a scalar input");
      }
      NussbaumGains g;
      g.gamma1 = c.control.nussbaum.gamma1;
      g.gamma2 = c.control.nussbaum.gamma2;
      g.k = c.control.nussbaum.k;
      g.regressor = rd.vec(c.control.nussbaum.regressor, cpath + "/regressor");
      g.zeta0 = c.control.nussbaum.zeta0;
      g.theta0 = c.control.nussbaum.theta0;
      try {
        c.nussbaum = NussbaumController(g, c.plant.state_names());
      } catch (const Error& e) {
        fail(cpath, e.what());
      }
      break;
    }
    case ControllerKind::DobBackstepping: {
      if (m != n) fail(cpath + "/chain_length", "dob_backstepping needs chain_length equal to the number of z levels");
      DobBackstepGains g{c.control.dob.k, c.control.dob.gamma_f, c.control.dob.sigma, c.control.dob.node_cap};
      try {
        c.dob_backstepping = DobBacksteppingController::build(c.plant, spec.rho, c.control.dob.observer, g);
      } catch (const SpecError& e) {
        fail(cpath, e.what());
      }
      break;
    }
  }
  return c;
}

}  // namespace pcbf
