#include <benchmark/benchmark.h>

#include "mixl/averaging.hpp"
#include "mixl/draws.hpp"
#include "mixl/estimation.hpp"
#include "mixl/models.hpp"
#include "mixl/simgen.hpp"

namespace {

struct SimFixture {
  mixl::SimConfig config;
  mixl::ChoiceDataset data;

  explicit SimFixture(std::size_t persons) : config(mixl::default_sim_config(1)) {
    config.n_persons = persons;
    data = mixl::apply_coding(mixl::generate(config).dataset, mixl::sim_coding(config));
  }
};

void BM_PanelLikelihood(benchmark::State& state) {
  const SimFixture fx(static_cast<std::size_t>(state.range(0)));
  const auto family = static_cast<mixl::Family>(state.range(2));
  const mixl::ModelSpec spec = mixl::sim_model_spec(fx.config, family);
  const auto draws = mixl::make_simulation_draws(spec, fx.data.persons.size(), static_cast<std::size_t>(state.range(1)), 1);
  const mixl::CompiledModel model(spec, fx.data, draws);
  const auto theta = mixl::default_start(spec);
  for (auto _ : state) benchmark::DoNotOptimize(model.log_likelihood(theta));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(1));
}
BENCHMARK(BM_PanelLikelihood)
    ->Args({200, 100, static_cast<int>(mixl::Family::Normal)})
    ->Args({200, 100, static_cast<int>(mixl::Family::Triangular)})
    ->Args({200, 100, static_cast<int>(mixl::Family::Fm3)})
    ->Args({200, 500, static_cast<int>(mixl::Family::Normal)})
    ->Unit(benchmark::kMillisecond);

void BM_Mlhs(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(mixl::mlhs(static_cast<std::size_t>(state.range(0)), 500, 6, 3));
}
BENCHMARK(BM_Mlhs)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_WeightEstimation(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0)), k = 7;
  mixl::LikelihoodMatrix m;
  mixl::Rng rng(5);
  for (std::size_t j = 0; j < k; ++j) m.model_ids.push_back("m" + std::to_string(j));
  for (std::size_t i = 0; i < n; ++i) {
    m.person_ids.push_back("p" + std::to_string(i));
    for (std::size_t j = 0; j < k; ++j) m.values.push_back(1e-6 + rng.uniform() * 1e-3);
  }
  for (auto _ : state) benchmark::DoNotOptimize(mixl::estimate_weights(m));
}
BENCHMARK(BM_WeightEstimation)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
