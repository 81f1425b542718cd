#include <benchmark/benchmark.h>

#include "psgdwa/data.hpp"
#include "psgdwa/erm.hpp"
#include "psgdwa/optimizer.hpp"

namespace {

using namespace psgdwa;

SyntheticSpec spec_for(Eigen::Index d) {
  return SyntheticSpec{d, ramp(d), 1.0, IdentityCovariance{}, 1};
}

void BM_SyntheticDraw(benchmark::State& state) {
  SyntheticStream stream(spec_for(state.range(0)));
  Sample s;
  for (auto _ : state) {
    stream.draw_into(s);
    benchmark::DoNotOptimize(s.y);
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_SyntheticDraw)->Arg(1)->Arg(25)->Arg(90);

void BM_Step(benchmark::State& state) {
  const auto d = state.range(0);
  const auto method = static_cast<Method>(state.range(1));
  const auto spec = spec_for(d);
  SyntheticStream stream(spec);
  std::vector<Sample> samples(1024);
  for (auto& s : samples) stream.draw_into(s);
  const auto set = ConstraintSet::box_around(spec.omega_star, 100.0);
  const auto sched = StepSchedule::constrained(10.0, 1.0);
  const MethodSpec m = method == Method::PsgdA ? MethodSpec::psgd_a(0.002)
                                               : MethodSpec{method, 0.0};
  auto st = OptimizerState::initial(m, sched, set, d);
  std::size_t i = 0;
  for (auto _ : state) {
    step_in_place(st, samples[i++ & 1023], sched, set);
    benchmark::DoNotOptimize(st.omega_bar.data());
  }
  state.SetItemsProcessed(state.iterations());
  state.SetLabel(std::string(to_string(method)));
}
BENCHMARK(BM_Step)->ArgsProduct({{25, 90}, {0, 1, 2}});

void BM_ErmAbsorb(benchmark::State& state) {
  const auto d = state.range(0);
  SyntheticStream stream(spec_for(d));
  std::vector<Sample> samples(1024);
  for (auto& s : samples) stream.draw_into(s);
  SufficientStats stats(d);
  std::size_t i = 0;
  for (auto _ : state) {
    stats.absorb(samples[i++ & 1023]);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ErmAbsorb)->Arg(25)->Arg(90);

void BM_ErmSolve(benchmark::State& state) {
  const auto d = state.range(0);
  SyntheticStream stream(spec_for(d));
  SufficientStats stats(d);
  for (int i = 0; i < 4 * d; ++i) stats.absorb(stream.draw());
  const auto set = ConstraintSet::unbounded();
  for (auto _ : state) benchmark::DoNotOptimize(solve(stats, set));
}
BENCHMARK(BM_ErmSolve)->Arg(25)->Arg(90);

}  // namespace

BENCHMARK_MAIN();
