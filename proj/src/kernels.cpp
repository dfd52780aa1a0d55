// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "difflab/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace difflab::kernels {

namespace {

inline double distance(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) {
    const double diff = x[d] - y[d];
    s += diff * diff;
  }
  return std::sqrt(s);
}

void check_dims(PointSet a, PointSet b) {
  if (a.dim != b.dim) throw ShapeError("point sets differ in dimension");
}

double row_distance_sum(PointSet a, std::size_t i, PointSet b) {
  double s = 0.0;
  const auto x = a.point(i);
  for (std::size_t j = 0; j < b.size(); ++j) s += distance(x, b.point(j));
  return s;
}

double kth_neighbour(PointSet points, std::size_t i, std::size_t k, std::vector<double>& scratch) {
  scratch.clear();
  const auto x = points.point(i);
  for (std::size_t j = 0; j < points.size(); ++j)
    if (j != i) scratch.push_back(distance(x, points.point(j)));
  std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k - 1), scratch.end());
  return scratch[k - 1];
}

bool inside_any(std::span<const double> q, PointSet centers, std::span<const double> radii) {
  for (std::size_t i = 0; i < centers.size(); ++i)
    if (distance(q, centers.point(i)) <= radii[i]) return true;
  return false;
}

void check_knn(PointSet points, std::size_t k) {
  if (k == 0 || k >= points.size())
    throw InvalidArgument("k must satisfy 1 <= k < set size (k=" + std::to_string(k) +
                          ", n=" + std::to_string(points.size()) + ")");
}

}  // namespace

namespace serial {

template <typename Real>
void gemm(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t n, std::size_t k,
          std::size_t m) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Real s = 0;
      for (std::size_t p = 0; p < k; ++p) s += a[i * k + p] * b[p * m + j];
      c[i * m + j] = s;
    }
}

double distance_sum(PointSet a, PointSet b) {
  check_dims(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += row_distance_sum(a, i, b);
  return s;
}

std::vector<double> knn_radii(PointSet points, std::size_t k) {
  check_knn(points, k);
  std::vector<double> radii(points.size());
  std::vector<double> scratch;
  for (std::size_t i = 0; i < points.size(); ++i) radii[i] = kth_neighbour(points, i, k, scratch);
  return radii;
}

std::vector<char> in_any_ball(PointSet queries, PointSet centers, std::span<const double> radii) {
  check_dims(queries, centers);
  std::vector<char> inside(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) inside[q] = inside_any(queries.point(q), centers, radii);
  return inside;
}

template void gemm(std::span<const float>, std::span<const float>, std::span<float>, std::size_t, std::size_t,
                   std::size_t);
template void gemm(std::span<const double>, std::span<const double>, std::span<double>, std::size_t, std::size_t,
                   std::size_t);

}  // namespace serial

namespace parallel {

template <typename Real>
void gemm(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t n, std::size_t k,
          std::size_t m) {
  const Real* pa = a.data();
  const Real* pb = b.data();
  Real* pc = c.data();
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n * k * m > 32768)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    Real* ci = pc + i * static_cast<std::ptrdiff_t>(m);
    std::fill(ci, ci + m, Real(0));
    const Real* ai = pa + i * static_cast<std::ptrdiff_t>(k);
    for (std::size_t p = 0; p < k; ++p) {
      const Real aip = ai[p];
      const Real* bp = pb + p * m;
#pragma omp simd
      for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
    }
  }
}

double distance_sum(PointSet a, PointSet b) {
  check_dims(a, b);
  std::vector<double> partial(a.size());
  const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) partial[static_cast<std::size_t>(i)] = row_distance_sum(a, i, b);
  return std::accumulate(partial.begin(), partial.end(), 0.0);
}

std::vector<double> knn_radii(PointSet points, std::size_t k) {
  check_knn(points, k);
  std::vector<double> radii(points.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i)
      radii[static_cast<std::size_t>(i)] = kth_neighbour(points, static_cast<std::size_t>(i), k, scratch);
  }
  return radii;
}

std::vector<char> in_any_ball(PointSet queries, PointSet centers, std::span<const double> radii) {
  check_dims(queries, centers);
  std::vector<char> inside(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t q = 0; q < n; ++q)
    inside[static_cast<std::size_t>(q)] = inside_any(queries.point(static_cast<std::size_t>(q)), centers, radii);
  return inside;
}

template void gemm(std::span<const float>, std::span<const float>, std::span<float>, std::size_t, std::size_t,
                   std::size_t);
template void gemm(std::span<const double>, std::span<const double>, std::span<double>, std::size_t, std::size_t,
                   std::size_t);

}  // namespace parallel

int set_num_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
  return omp_get_max_threads();
#else
  (void)n;
  return 1;
#endif
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace difflab::kernels
