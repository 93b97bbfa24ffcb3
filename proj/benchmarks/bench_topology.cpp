#include <benchmark/benchmark.h>

#include <random>

#include "ridecast/synthetic.hpp"
#include "ridecast/topology.hpp"

using namespace ridecast;

namespace {

RouteProfile route_of(double km) {
  const GeneratorSpec spec;
  std::mt19937_64 rng(11);
  return profile_from_track(generate_track(spec, km, ClimbPlacement::Uniform, rng));
}

}  // namespace

static void BM_DetectClimbs(benchmark::State& state) {
  const auto p = route_of(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(detect_climbs(p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}

static void BM_ExtractTopology(benchmark::State& state) {
  const auto p = route_of(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(extract_topology(p));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(p.size()));
}

BENCHMARK(BM_DetectClimbs)->Arg(20)->Arg(100)->Arg(200);
BENCHMARK(BM_ExtractTopology)->Arg(20)->Arg(100)->Arg(200);
