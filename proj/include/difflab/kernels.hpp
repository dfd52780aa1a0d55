// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

// Data-parallel inner loops. Each kernel exists twice: `serial` is the
// plain reference used by tests and the benchmark, `parallel` is the
// OpenMP version used by the library. Parallel kernels split work by output
// row and reduce per-row partials in index order, so their results do not
// depend on the thread count.
namespace difflab::kernels {

/// Point sets are row-major [n, dim] buffers.
struct PointSet {
  std::span<const double> data;
  std::size_t dim = 0;
  std::size_t size() const { return dim == 0 ? 0 : data.size() / dim; }
  std::span<const double> point(std::size_t i) const { return data.subspan(i * dim, dim); }
};

namespace serial {

/// c[n,m] = a[n,k] * b[k,m]
template <typename Real>
void gemm(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t n, std::size_t k,
          std::size_t m);

/// Sum of Euclidean distances over all ordered pairs (i, j), i in a, j in b.
double distance_sum(PointSet a, PointSet b);

/// Distance from each point to its k-th nearest neighbour within the set,
/// excluding the point itself.
std::vector<double> knn_radii(PointSet points, std::size_t k);

/// inside[q] = 1 when query q lies in at least one ball (centers[i], radii[i]).
std::vector<char> in_any_ball(PointSet queries, PointSet centers, std::span<const double> radii);

}  // namespace serial

namespace parallel {

template <typename Real>
void gemm(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t n, std::size_t k,
          std::size_t m);
double distance_sum(PointSet a, PointSet b);
std::vector<double> knn_radii(PointSet points, std::size_t k);
std::vector<char> in_any_ball(PointSet queries, PointSet centers, std::span<const double> radii);

}  // namespace parallel

/// Sets the OpenMP thread count (no-op without OpenMP). Returns the count in effect.
int set_num_threads(int n);
int num_threads();

}  // namespace difflab::kernels
