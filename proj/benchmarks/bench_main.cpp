#include <benchmark/benchmark.h>

#include <numbers>
#include <random>

#include "lgsim/three_box.hpp"
#include "lgsim/three_level.hpp"

using namespace lgsim;
namespace tl = lgsim::threelevel;

namespace {

constexpr double kPi = std::numbers::pi;

void BM_SolveChi(benchmark::State& state) {
  const tl::Evaluator ev;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, kPi);
  for (auto _ : state) benchmark::DoNotOptimize(tl::solve_chi(ev, u(rng), u(rng)));
}
BENCHMARK(BM_SolveChi);

void BM_EvaluatePoint(benchmark::State& state) {
  const tl::Evaluator ev;
  const tl::Params p{0.831 * kPi, 0.6875 * kPi, 0.4235 * kPi};
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(p));
}
BENCHMARK(BM_EvaluatePoint);

// General complex pipeline at the same point, for comparison with the fast path.
void BM_RunProtocolThreeLevel(benchmark::State& state) {
  const auto proto = tl::protocol_at({0.831 * kPi, 0.6875 * kPi, 0.4235 * kPi});
  for (auto _ : state) {
    const auto t = run_protocol(proto);
    benchmark::DoNotOptimize(correlator_K_ambiguous(proto, t));
  }
}
BENCHMARK(BM_RunProtocolThreeLevel);

void BM_ThreeBox(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(threebox::run());
}
BENCHMARK(BM_ThreeBox);

void BM_Scan(benchmark::State& state) {
  tl::ScanOptions o;
  o.theta_points = o.phi_points = static_cast<int>(state.range(0));
  o.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(tl::scan(o));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}
BENCHMARK(BM_Scan)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
