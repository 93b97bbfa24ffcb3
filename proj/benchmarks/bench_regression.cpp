#include <benchmark/benchmark.h>

#include <random>

#include "ridecast/regression.hpp"

using namespace ridecast;

namespace {

struct Problem {
  Matrix X;
  Vector y;
};

Problem problem(Eigen::Index n, Eigen::Index p) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  Problem out{Matrix(n, p), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) out.X(i, j) = z(rng);
  }
  Vector beta = Vector::Zero(p);
  for (Eigen::Index j = 0; j < std::min<Eigen::Index>(p, 8); ++j) beta(j) = 1.0 + static_cast<double>(j);
  out.y = out.X * beta;
  for (Eigen::Index i = 0; i < n; ++i) out.y(i) += z(rng);
  return out;
}

}  // namespace

static void BM_Lasso(benchmark::State& state) {
  const auto pr = problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_lasso(pr.X, pr.y, 0.1));
}

static void BM_ElasticNet(benchmark::State& state) {
  const auto pr = problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_elasticnet(pr.X, pr.y, 0.1, 0.5));
}

static void BM_Ridge(benchmark::State& state) {
  const auto pr = problem(state.range(0), state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(fit_ridge(pr.X, pr.y, 1.0));
}

BENCHMARK(BM_Lasso)->Args({96, 31})->Args({96, 79})->Args({1000, 79});
BENCHMARK(BM_ElasticNet)->Args({96, 31})->Args({96, 79});
BENCHMARK(BM_Ridge)->Args({96, 79});
