#include <benchmark/benchmark.h>

#include "ridecast/synthetic.hpp"
#include "ridecast/validation.hpp"

using namespace ridecast;

static void BM_NestedCV(benchmark::State& state) {
  GeneratorSpec spec;
  spec.n_activities = static_cast<std::size_t>(state.range(0));
  const auto ds = corpus_dataset(generate_corpus(spec), FeatureConfig::TopologyFitness);
  const auto plan = stratified_folds(ds, kOuterFolds, 42);
  const auto lasso = make_spec(ModelKind::Lasso, FeatureConfig::TopologyFitness);
  for (auto _ : state) benchmark::DoNotOptimize(nested_cv(ds, lasso, plan));
}

BENCHMARK(BM_NestedCV)->Arg(96)->Unit(benchmark::kMillisecond);
