#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pcbf/scenario.hpp"
#include "pcbf_cli/cli.hpp"

namespace pcbf::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("pcbf_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& s) const { return path_ / s; }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string write_spec(const TempDir& dir, const std::string& file, const ScenarioSpec& spec) {
  const auto p = dir / file;
  std::ofstream(p) << scenario_to_json(spec);
  return p.string();
}

TEST(Cli, ListsBuiltinScenarios) {
  const auto r = call({"scenarios"});
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.out.find("ship\t"), std::string::npos);
  EXPECT_NE(r.out.find("electromech\t"), std::string::npos);
}

TEST(Cli, CheckShipPasses) {
  const auto r = call({"check", "ship", "--json"});
  ASSERT_EQ(r.code, kOk) << r.out << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  const auto& two = j["barriers"][0]["two"];
  EXPECT_NEAR(two["margin"].get<double>(), 5.996, 1e-9);
  EXPECT_NEAR(j["barriers"][0]["three"]["b"][0].get<double>(), 5.996, 1e-9);
}

TEST(Cli, CheckReportsFailedConditionTwo) {
  TempDir dir;
  auto spec = *builtin_scenario("ship");
  spec.rho = RhoSpec::constant(10.0);
  const auto r = call({"check", write_spec(dir, "wide.json", spec)});
  EXPECT_EQ(r.code, kCheckFailed);
  EXPECT_NE(r.out.find("(ii)  fail"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("conditions FAIL"), std::string::npos);
}

TEST(Cli, CheckReportsFailedConditionThree) {
  TempDir dir;
  auto spec = *builtin_scenario("ship");
  spec.x0 = {0.34};
  const auto r = call({"check", write_spec(dir, "edge.json", spec), "--json"});
  EXPECT_EQ(r.code, kCheckFailed);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["barriers"][0]["three"]["verdict"], "fail");
  EXPECT_GT(j["barriers"][0]["three"]["y0"].get<double>(), 0.0);
  EXPECT_LT(j["barriers"][0]["three"]["b"][0].get<double>(), 0.0);
}

TEST(Cli, RunWritesTraceAndSummary) {
  TempDir dir;
  const auto csv = (dir / "out" / "ship.csv").string();
  const auto r = call({"run", "ship", "--horizon", "5", "--out", csv});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["verdict"], "SAFE");
  EXPECT_EQ(j["rows"].get<int>(), 501);
  EXPECT_EQ(j["trace"], csv);
  EXPECT_GE(j["min_h"].get<double>(), 0.0);
  EXPECT_LE(j["max_error_over_rho"].get<double>(), 1.0);
  const auto trace = read_csv(csv);
  EXPECT_EQ(trace.size(), 501u);
}

TEST(Cli, RunRefusesFailedConditionsUnlessForced) {
  TempDir dir;
  auto spec = *builtin_scenario("ship");
  spec.rho = RhoSpec::constant(10.0);
  const auto file = write_spec(dir, "wide.json", spec);
  const auto refused = call({"run", file, "--horizon", "1"});
  EXPECT_EQ(refused.code, kCheckFailed);
  EXPECT_NE(refused.err.find("(ii)"), std::string::npos);
  const auto forced = call({"run", file, "--horizon", "1", "--force"});
  EXPECT_EQ(forced.code, kAborted);
  EXPECT_TRUE(nlohmann::json::parse(forced.out).contains("warnings"));

  spec = *builtin_scenario("ship");
  spec.x0 = {0.34};
  const auto edge = write_spec(dir, "edge.json", spec);
  EXPECT_EQ(call({"run", edge, "--horizon", "5"}).code, kCheckFailed);
  EXPECT_EQ(call({"run", edge, "--horizon", "5", "--force"}).code, kOk);
}

TEST(Cli, ControllerOverride) {
  const auto r = call({"run", "electromech", "--controller", "ppc", "--horizon", "0.5"});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["controller"], "ppc");
  EXPECT_EQ(call({"run", "electromech", "--controller", "nope", "--horizon", "0.5"}).code, kUsage);
}

TEST(Cli, PlotWritesFivePanels) {
  TempDir dir;
  const auto csv = (dir / "e.csv").string();
  ASSERT_EQ(call({"run", "electromech", "--horizon", "1", "--out", csv}).code, kOk);
  const auto plots = dir / "plots";
  const auto r = call({"plot", csv, "--out", plots.string(), "--bound", "-0.5", "--bound", "0.5"});
  ASSERT_EQ(r.code, kOk) << r.err;
  for (const char* f : {"state.svg", "error.svg", "input.svg", "barrier.svg", "panels.svg"}) {
    const auto p = plots / f;
    ASSERT_TRUE(fs::exists(p)) << f;
    std::ifstream in(p);
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text.rfind("<svg", 0), 0u) << f;
    EXPECT_NE(text.find("</svg>"), std::string::npos);
  }
}

TEST(Cli, PlotOfEmptyTraceWritesNothing) {
  TempDir dir;
  const auto csv = (dir / "empty.csv").string();
  std::ofstream(csv) << "t,x,xd,e,rho,u,h\n";
  const auto plots = dir / "plots";
  const auto r = call({"plot", csv, "--out", plots.string()});
  EXPECT_EQ(r.code, kUsage);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
  EXPECT_FALSE(fs::exists(plots / "panels.svg"));
}

TEST(Cli, BatchRunsEveryScenario) {
  TempDir dir;
  const auto in = dir / "in";
  fs::create_directories(in);
  for (const char* name : {"ship", "electromech"}) {
    auto spec = *builtin_scenario(name);
    spec.horizon = 0.5;
    std::ofstream(in / (std::string(name) + ".json")) << scenario_to_json(spec);
  }
  const auto out = dir / "traces";
  const auto r = call({"run", "--batch", in.string(), "--out", out.string()});
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(fs::exists(out / "ship.csv"));
  EXPECT_TRUE(fs::exists(out / "electromech.csv"));
  EXPECT_NE(r.out.find("== "), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, kUsage);
  EXPECT_EQ(call({"frobnicate"}).code, kUsage);
  EXPECT_EQ(call({"check"}).code, kUsage);
  EXPECT_EQ(call({"run"}).code, kUsage);
  EXPECT_EQ(call({"run", "ship", "--batch", "."}).code, kUsage);
  EXPECT_EQ(call({"run", "ship", "--dt", "fast"}).code, kUsage);
  EXPECT_EQ(call({"check", "no_such_scenario"}).code, kUsage);
  EXPECT_EQ(call({"plot", "/nonexistent.csv"}).code, kUsage);
  EXPECT_EQ(call({"--help"}).code, kOk);
}

TEST(Scenario, JsonRoundTripIsExact) {
  for (const auto& name : builtin_scenario_names()) {
    const auto spec = *builtin_scenario(name);
    const auto back = scenario_from_json(scenario_to_json(spec));
    EXPECT_TRUE(back == spec) << name;
    EXPECT_EQ(scenario_to_json(back), scenario_to_json(spec)) << name;
  }
}

TEST(Scenario, SchemaErrorsNameTheKey) {
  auto text = scenario_to_json(*builtin_scenario("ship"));
  const auto pos = text.find("\"xi\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 4, "\"xj\"");
  try {
    (void)scenario_from_json(text);
    FAIL() << "accepted unknown key";
  } catch (const SpecError& e) {
    EXPECT_NE(std::string(e.what()).find("safety"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace pcbf::cli
