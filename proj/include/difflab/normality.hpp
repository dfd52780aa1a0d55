// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace difflab {

struct NormalityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;  // p_value < alpha
  std::size_t n = 0;
};

/// Shapiro-Wilk W with Royston's (1995) coefficient and p-value
/// approximations, valid for 3 <= n <= 5000. Throws InvalidArgument outside
/// that range or when all values are equal.
NormalityResult shapiro_wilk(std::span<const double> x, double alpha = 0.05);

/// Anderson-Darling test for normality with mean and variance estimated from
/// the sample. Reports the small-sample corrected A*; p-value from the
/// D'Agostino-Stephens piecewise fit. Needs n >= 8.
NormalityResult anderson_darling(std::span<const double> x, double alpha = 0.05);

enum class NormalityTest { shapiro_wilk, anderson_darling };
std::string to_string(NormalityTest t);
NormalityTest parse_normality_test(const std::string& s);
NormalityResult normality_test(NormalityTest test, std::span<const double> x, double alpha = 0.05);

/// 1-based ranks with ties given their average rank.
std::vector<double> average_ranks(std::span<const double> x);

/// Spearman rank correlation (Pearson correlation of average ranks).
/// Returns NaN when either input is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace difflab
