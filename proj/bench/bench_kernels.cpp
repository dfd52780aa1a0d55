// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <vector>

#include "difflab/kernels.hpp"
#include "difflab/rng.hpp"

namespace {

using namespace difflab;

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  rng.fill_normal<double>(v);
  return v;
}

template <bool Parallel>
void BM_Gemm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t k = 256, m = 256;
  const auto a = random_values(n * k, 1), b = random_values(k * m, 2);
  std::vector<double> c(n * m);
  for (auto _ : state) {
    if constexpr (Parallel)
      kernels::parallel::gemm<double>(a, b, c, n, k, m);
    else
      kernels::serial::gemm<double>(a, b, c, n, k, m);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * k * m));
}

template <bool Parallel>
void BM_DistanceSum(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 2;
  const auto a = random_values(n * dim, 3), b = random_values(n * dim, 4);
  const kernels::PointSet pa{a, dim}, pb{b, dim};
  for (auto _ : state) {
    double s = Parallel ? kernels::parallel::distance_sum(pa, pb) : kernels::serial::distance_sum(pa, pb);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n));
}

template <bool Parallel>
void BM_KnnRadii(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t dim = 2;
  const auto a = random_values(n * dim, 5);
  const kernels::PointSet pa{a, dim};
  for (auto _ : state) {
    auto r = Parallel ? kernels::parallel::knn_radii(pa, 3) : kernels::serial::knn_radii(pa, 3);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(BM_Gemm<false>)->Name("gemm/serial")->Arg(128)->Arg(512);
BENCHMARK(BM_Gemm<true>)->Name("gemm/parallel")->Arg(128)->Arg(512);
BENCHMARK(BM_DistanceSum<false>)->Name("distance_sum/serial")->Arg(1000)->Arg(4000);
BENCHMARK(BM_DistanceSum<true>)->Name("distance_sum/parallel")->Arg(1000)->Arg(4000);
BENCHMARK(BM_KnnRadii<false>)->Name("knn_radii/serial")->Arg(1000)->Arg(2000);
BENCHMARK(BM_KnnRadii<true>)->Name("knn_radii/parallel")->Arg(1000)->Arg(2000);

BENCHMARK_MAIN();
