#include <benchmark/benchmark.h>

#include "hybrid/catalog.hpp"
#include "hybrid/commands.hpp"
#include "hybrid/execution.hpp"
#include "hybrid/networks.hpp"

using namespace hybrid;

namespace {

Vector point(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void BM_BouncingBallToZeno(benchmark::State& state) {
  const auto ball = catalog::bouncing_ball(0.5);
  IntegratorOptions o;
  o.step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    const Execution e = execute(ball, {NodeId{0}, point(0.0, 0.5)}, o);
    benchmark::DoNotOptimize(e.jumps.size());
  }
}
BENCHMARK(BM_BouncingBallToZeno)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_MainTheorem(benchmark::State& state) {
  const auto nt = catalog::networked_thermostats(0.3);
  CheckOptions o;
  o.samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    const TheoremReport r = verify_main_theorem(nt.nm, nt.w, nt.v, o);
    benchmark::DoNotOptimize(r.hypothesis_holds);
  }
}
BENCHMARK(BM_MainTheorem)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_Demo(benchmark::State& state, const char* name) {
  for (auto _ : state) {
    const cli::Outcome o = cli::run("demo", name, "", {});
    benchmark::DoNotOptimize(o.report.size());
  }
}
BENCHMARK_CAPTURE(BM_Demo, thermostat, "thermostat")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Demo, networked_thermostats, "networked-thermostats")->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Demo, stability_transport, "stability-transport")->Unit(benchmark::kMillisecond);

void BM_FiniteSuite(benchmark::State& state) {
  for (auto _ : state) {
    const cli::Outcome o = cli::run("finite", "", "", {});
    benchmark::DoNotOptimize(o.exit_code);
  }
}
BENCHMARK(BM_FiniteSuite)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
