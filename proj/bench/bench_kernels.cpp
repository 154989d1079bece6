// Copyright 2026 The NAT Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts, plus the
// K-sample estimator run serially and in parallel.

#include <benchmark/benchmark.h>

#include "nat/estimator.hpp"
#include "nat/network.hpp"
#include "nat/numerics.hpp"
#include "nat/rng.hpp"
#include "nat/verify.hpp"

namespace {

nat::Matrix random_matrix(std::size_t rows, std::size_t cols, nat::Rng& rng) {
  nat::Matrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform() - 0.5;
  return m;
}

nat::Vector random_vector(std::size_t n, nat::Rng& rng) {
  nat::Vector v(n);
  for (double& x : v) x = rng.uniform() - 0.5;
  return v;
}

void BM_AffineReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nat::Rng rng(1, 0);
  const nat::Matrix w = random_matrix(4 * n, 2 * n, rng);
  const nat::Vector x = random_vector(2 * n, rng), b = random_vector(4 * n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nat::affine_reference(w, x, b));
}

void BM_AffineParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nat::Rng rng(1, 0);
  const nat::Matrix w = random_matrix(4 * n, 2 * n, rng);
  const nat::Vector x = random_vector(2 * n, rng), b = random_vector(4 * n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(nat::affine(w, x, b));
}

void BM_OuterReference(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nat::Rng rng(2, 0);
  nat::Matrix g(4 * n, 2 * n);
  const nat::Vector y = random_vector(4 * n, rng), x = random_vector(2 * n, rng);
  for (auto _ : state) {
    nat::accumulate_outer_reference(g, y, x);
    benchmark::ClobberMemory();
  }
}

void BM_OuterParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  nat::Rng rng(2, 0);
  nat::Matrix g(4 * n, 2 * n);
  const nat::Vector y = random_vector(4 * n, rng), x = random_vector(2 * n, rng);
  for (auto _ : state) {
    nat::accumulate_outer(g, y, x);
    benchmark::ClobberMemory();
  }
}

void BM_PolicyGradient(benchmark::State& state) {
  nat::Rng rng(3, 0);
  const nat::Instance inst =
      nat::random_instance(rng, 20, 6, nat::ModelShape{24, 8, 16, 32, 2}, 0.1);
  nat::EstimatorConfig cfg;
  cfg.num_samples = 16;
  cfg.parallel = state.range(0) != 0;
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        nat::policy_gradient(inst.params, inst.episode(), cfg, nat::Rng(4, i++)));
  }
}

BENCHMARK(BM_AffineReference)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_AffineParallel)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_OuterReference)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_OuterParallel)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(BM_PolicyGradient)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
