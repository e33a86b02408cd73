#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "pcbf/barrier.hpp"
#include "pcbf/filter.hpp"
#include "pcbf/parser.hpp"
#include "pcbf/program.hpp"
#include "pcbf/scenario.hpp"
#include "pcbf/sim.hpp"

namespace {

using namespace pcbf;

constexpr const char* kSource = "y1/0.3*(-2*x)*(mu1 - sin(x)) - (2*x*y1)^2/(2*0.05*0.09) + 10*y0 - 0.05*exp(-t)/2";

void BM_Parse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(parse(kSource));
}
BENCHMARK(BM_Parse);

void BM_DifferentiateSimplify(benchmark::State& state) {
  const Expr e = parse(kSource);
  for (auto _ : state) benchmark::DoNotOptimize(simplify(differentiate(e, "x")));
}
BENCHMARK(BM_DifferentiateSimplify);

void BM_TreeEvaluate(benchmark::State& state) {
  const Expr e = simplify(differentiate(parse(kSource), "x"));
  const Binding b{{"x", 0.1}, {"y0", 0.4}, {"y1", 1.2}, {"mu1", -0.3}, {"t", 2.0}};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(e, b));
}
BENCHMARK(BM_TreeEvaluate);

void BM_ProgramEvaluate(benchmark::State& state) {
  const std::vector<Expr> outs{simplify(differentiate(parse(kSource), "x"))};
  const Program prog(outs, {"x", "y0", "y1", "mu1", "t"});
  const std::vector<double> in{0.1, 0.4, 1.2, -0.3, 2.0};
  std::vector<double> out(1), scratch;
  for (auto _ : state) {
    prog.evaluate(in, out, scratch);
    benchmark::DoNotOptimize(out[0]);
  }
}
BENCHMARK(BM_ProgramEvaluate);

void BM_CbfQp(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> nominal(dim), psi1(dim);
  for (std::size_t i = 0; i < dim; ++i) nominal[i] = u(rng), psi1[i] = u(rng);
  for (auto _ : state) benchmark::DoNotOptimize(solve_cbf_qp(nominal, -5.0, psi1));
}
BENCHMARK(BM_CbfQp)->Arg(1)->Arg(4)->Arg(16);

void BM_ConstraintEvaluation(benchmark::State& state) {
  const auto sc = compile_scenario(load_scenario("electromech"));
  const std::vector<double> x{-0.1}, mu{0.05, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(sc.stacks[0].eval_constraint(x, mu, 1.0));
}
BENCHMARK(BM_ConstraintEvaluation);

void BM_SimulateOneSecond(benchmark::State& state) {
  const char* names[] = {"ship", "electromech"};
  const auto sc = compile_scenario(load_scenario(names[state.range(0)]));
  SimOptions o;
  o.horizon = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(simulate(sc, o));
  state.SetLabel(names[state.range(0)]);
}
BENCHMARK(BM_SimulateOneSecond)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
