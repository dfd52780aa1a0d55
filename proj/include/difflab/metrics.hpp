// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "difflab/ndarray.hpp"

// Distribution distances between sample sets given as [n, dim] arrays.
namespace difflab {

struct GaussianStats {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased (n - 1) estimate
  std::size_t count = 0;
};

/// Throws InvalidArgument for fewer than two samples.
GaussianStats fit_gaussian_stats(const NdArray<double>& samples);

/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2).
///
/// Covariances are symmetrized and their eigenvalues floored at 1e-10
/// before their square roots (the product term is clamped at 0). An eigenvalue that is clearly negative
/// (beyond round-off) raises NumericError naming the matrix and value.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);
double frechet_gaussian_distance(const NdArray<double>& a, const NdArray<double>& b);

/// V-statistic energy distance 2 E|a - b| - E|a - a'| - E|b - b'|, with the
/// expectations taken over all ordered pairs (self pairs included).
double energy_distance(const NdArray<double>& a, const NdArray<double>& b);

/// Same quantity for scalar samples in O(n log n).
double energy_distance_1d(std::span<const double> a, std::span<const double> b);

struct TwoSampleTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t permutations = 0;
};

/// Permutation test of equal distributions with the energy distance as the
/// statistic; p = (1 + #{permuted >= observed}) / (1 + permutations).
/// Scalar data use a linear-time pass per permutation; other dimensions
/// precompute the pooled distance matrix and are limited to 4000 points.
TwoSampleTest energy_permutation_test(const NdArray<double>& a, const NdArray<double>& b, std::size_t permutations,
                                      std::uint64_t seed);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Improved precision/recall: each set's manifold is the union of balls
/// around its points with radius = distance to the k-th nearest other point
/// of the same set (boundary inclusive). precision = share of generated
/// points in the real manifold, recall = share of real points in the
/// generated manifold. Throws InvalidArgument when k == 0 or k >= a set size.
PrecisionRecall knn_precision_recall(const NdArray<double>& real, const NdArray<double>& generated, std::size_t k);

struct MetricReport {
  std::string metric;
  double value = 0.0;
  std::size_t n_a = 0, n_b = 0;
  std::uint64_t seed = 0;
  double half_width = std::numeric_limits<double>::quiet_NaN();  // NaN = not applicable
};

void write_metric_csv(const std::filesystem::path& path, const std::vector<MetricReport>& rows);

}  // namespace difflab
