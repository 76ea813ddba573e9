#include <benchmark/benchmark.h>

#include <random>

#include "proxyprox/data_io.hpp"
#include "proxyprox/inner_solvers.hpp"
#include "proxyprox/problems.hpp"
#include "proxyprox/subproblem.hpp"

using namespace proxyprox;

namespace {

Vector random_point(std::mt19937_64& rng, Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector w(d);
  for (Index i = 0; i < d; ++i) w[i] = normal(rng);
  return w;
}

const Dataset& bench_data() {
  static const Dataset data = make_mushrooms_like(1);
  return data;
}

}  // namespace

static void BM_logistic_full_gradient(benchmark::State& state) {
  auto data = std::make_shared<Dataset>(bench_data());
  LogisticOracle oracle(data, data->y, 1e-6);
  std::mt19937_64 rng(2);
  const Vector w = random_point(rng, oracle.dim());
  for (auto _ : state) {
    Vector g = oracle.gradient(w);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_logistic_full_gradient);

static void BM_minibatch_gradient(benchmark::State& state) {
  auto data = std::make_shared<Dataset>(bench_data());
  auto oracle = std::make_shared<LogisticOracle>(data, data->y, 1e-6);
  MinibatchGradientSource source(oracle, state.range(0), 1.0, 3);
  std::mt19937_64 rng(4);
  const Vector w = random_point(rng, oracle->dim());
  for (auto _ : state) {
    Vector g = source.sample(w);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_minibatch_gradient)->Arg(64)->Arg(256)->Arg(1024);

static void BM_phi_gradient(benchmark::State& state) {
  auto data = std::make_shared<Dataset>(bench_data());
  auto proxy = std::make_shared<LogisticOracle>(data, Vector::Ones(data->n()), 1e-6);
  std::mt19937_64 rng(5);
  const Vector anchor = random_point(rng, proxy->dim());
  ProxSubproblem sp(anchor, random_point(rng, proxy->dim()), 0.5, proxy);
  const Vector w = random_point(rng, proxy->dim());
  for (auto _ : state) {
    Vector g = sp.gradient(w);
    benchmark::DoNotOptimize(g);
  }
}
BENCHMARK(BM_phi_gradient);

static void BM_quadratic_exact_solve(benchmark::State& state) {
  const Index d = state.range(0);
  std::mt19937_64 rng(6);
  Matrix G(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      G(i, j) = std::normal_distribution<double>()(rng);
  const Matrix P = G * G.transpose() / static_cast<double>(d);
  QuadraticProxSolver solver(P, 0.25);
  const Vector anchor = random_point(rng, d);
  const Vector g = random_point(rng, d);
  for (auto _ : state) {
    Vector w = solver.solve(anchor, g);
    benchmark::DoNotOptimize(w);
  }
}
BENCHMARK(BM_quadratic_exact_solve)->Arg(112)->Arg(512);

static void BM_parse_mushrooms_like(benchmark::State& state) {
  const std::string text = serialize_sparse_classification(bench_data());
  for (auto _ : state) {
    Dataset d = parse_sparse_classification_text(text);
    benchmark::DoNotOptimize(d);
  }
}
BENCHMARK(BM_parse_mushrooms_like);

BENCHMARK_MAIN();
