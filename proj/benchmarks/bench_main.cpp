#include <benchmark/benchmark.h>

#include <string>

#include "bnsens/experiment.hpp"
#include "bnsens/inference.hpp"
#include "bnsens/noise.hpp"
#include "bnsens/synth.hpp"

using namespace bnsens;

namespace {

const char* const kPresets[] = {"bn2", "bn3", "bn4"};

// Phase-5 evidence of one biased case, i.e. every finding observed.
Evidence full_evidence(const Network& net) { return make_cases(net, 1, true, 11).front().evidence(kPhaseCount); }

void BM_ExactPosteriors(benchmark::State& state) {
  Network net = generate_network(preset_spec(kPresets[state.range(0)], 1));
  CompiledNetwork compiled(net);
  Evidence ev = make_cases(net, 1, true, 11).front().evidence(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(exact_posteriors(compiled, ev, 64));
  }
  state.SetLabel(std::string(kPresets[state.range(0)]) + " phase " + std::to_string(state.range(1)));
}
BENCHMARK(BM_ExactPosteriors)->ArgsProduct({{0, 1}, {1, 3, 5}})->Unit(benchmark::kMicrosecond);

void BM_LwPosteriors(benchmark::State& state) {
  Network net = generate_network(preset_spec("bn4", 1));
  CompiledNetwork compiled(net);
  Evidence ev = full_evidence(net);
  const auto samples = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(lw_posteriors(compiled, ev, samples, 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LwPosteriors)->Arg(10'000)->Arg(100'000)->Unit(benchmark::kMillisecond);

void BM_PerturbNetwork(benchmark::State& state) {
  Network net = generate_network(preset_spec("bn4", 1));
  NoiseSpec spec{ParameterClass::Link, 2.0, 1000, 5};
  std::size_t replica = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(perturb_network(net, spec, replica));
    replica = (replica + 1) % spec.replicas;
  }
}
BENCHMARK(BM_PerturbNetwork)->Unit(benchmark::kMicrosecond);

void BM_LogicSample(benchmark::State& state) {
  Network net = generate_network(preset_spec("bn4", 1));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(logic_sample(net, seed++));
  }
}
BENCHMARK(BM_LogicSample)->Unit(benchmark::kMicrosecond);

void BM_Perturb(benchmark::State& state) {
  Rng rng(7);
  const Probability p(0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(perturb(p, 1.0, rng));
  }
}
BENCHMARK(BM_Perturb);

}  // namespace

BENCHMARK_MAIN();
