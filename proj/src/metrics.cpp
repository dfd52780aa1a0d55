// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "difflab/errors.hpp"
#include "difflab/kernels.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

constexpr double kEigenFloor = 1e-10;

kernels::PointSet points(const NdArray<double>& a) { return {a.data(), a.cols()}; }

void require_points(const NdArray<double>& a, const char* what) {
  if (a.rank() != 2 || a.rows() == 0) throw InvalidArgument(std::string(what) + ": need a non-empty [n, dim] array");
}

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m, const char* name, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  if (!sym.allFinite()) throw NumericError(std::string(name) + " has non-finite entries");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) throw NumericError(std::string("eigendecomposition of ") + name + " failed");
  Eigen::VectorXd lam = eig.eigenvalues();
  const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < -1e-8 * scale) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s is not positive semidefinite: eigenvalue %.6g (largest magnitude %.6g)", name,
                    lam(i), scale);
      throw NumericError(buf);
    }
    lam(i) = std::sqrt(std::max(lam(i), floor));
  }
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

// Sum over ordered pairs of |x_i - x_j| for sorted x: 2 sum_k x_k (2k - n + 1), k 0-based.
double sorted_pair_sum(std::span<const double> sorted) {
  const double n = static_cast<double>(sorted.size());
  double s = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) s += sorted[k] * (2.0 * static_cast<double>(k) - n + 1.0);
  return 2.0 * s;
}

// Energy distance from within-set pair sums and the pooled pair sum.
double energy_from_sums(double s_aa, double s_bb, double s_pool, double n, double m) {
  const double s_ab = 0.5 * (s_pool - s_aa - s_bb);
  return 2.0 * s_ab / (n * m) - s_aa / (n * n) - s_bb / (m * m);
}

}  // namespace

GaussianStats fit_gaussian_stats(const NdArray<double>& samples) {
  require_points(samples, "fit_gaussian_stats");
  const std::size_t n = samples.rows(), d = samples.cols();
  if (n < 2) throw InvalidArgument("fit_gaussian_stats needs at least two samples");
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
      samples.data().data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  GaussianStats s;
  s.count = n;
  s.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - s.mean.transpose();
  s.cov = centered.transpose() * centered / static_cast<double>(n - 1);
  return s;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  if (a.mean.size() != b.mean.size()) throw ShapeError("frechet_distance: dimensions differ");
  const Eigen::MatrixXd s1 = symmetric_sqrt(a.cov, "first covariance", kEigenFloor);
  const Eigen::MatrixXd inner = s1 * (0.5 * (b.cov + b.cov.transpose())) * s1;
  const Eigen::MatrixXd root = symmetric_sqrt(inner, "covariance product", 0.0);
  // Use the floored first covariance so identical inputs cancel exactly.
  const double tr1 = (s1 * s1).trace();
  const double tr2 = symmetric_sqrt(b.cov, "second covariance", kEigenFloor).squaredNorm();
  const double fd = (a.mean - b.mean).squaredNorm() + tr1 + tr2 - 2.0 * root.trace();
  return std::max(0.0, fd);
}

double frechet_gaussian_distance(const NdArray<double>& a, const NdArray<double>& b) {
  return frechet_distance(fit_gaussian_stats(a), fit_gaussian_stats(b));
}

double energy_distance(const NdArray<double>& a, const NdArray<double>& b) {
  require_points(a, "energy_distance");
  require_points(b, "energy_distance");
  if (a.cols() != b.cols()) throw ShapeError("energy_distance: dimensions differ");
  const double n = static_cast<double>(a.rows()), m = static_cast<double>(b.rows());
  const double ab = kernels::parallel::distance_sum(points(a), points(b));
  const double aa = kernels::parallel::distance_sum(points(a), points(a));
  const double bb = kernels::parallel::distance_sum(points(b), points(b));
  return std::max(0.0, 2.0 * ab / (n * m) - aa / (n * n) - bb / (m * m));
}

double energy_distance_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("energy_distance_1d: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end()), pool;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  pool.resize(sa.size() + sb.size());
  std::merge(sa.begin(), sa.end(), sb.begin(), sb.end(), pool.begin());
  const double e = energy_from_sums(sorted_pair_sum(sa), sorted_pair_sum(sb), sorted_pair_sum(pool),
                                    static_cast<double>(sa.size()), static_cast<double>(sb.size()));
  return std::max(0.0, e);
}

TwoSampleTest energy_permutation_test(const NdArray<double>& a, const NdArray<double>& b, std::size_t permutations,
                                      std::uint64_t seed) {
  require_points(a, "energy_permutation_test");
  require_points(b, "energy_permutation_test");
  if (a.cols() != b.cols()) throw ShapeError("energy_permutation_test: dimensions differ");
  const std::size_t n = a.rows(), m = b.rows(), total = n + m;
  const double dn = static_cast<double>(n), dm = static_cast<double>(m);

  TwoSampleTest result;
  result.permutations = permutations;
  std::vector<char> label(total, 0);  // 1 = first sample
  std::fill_n(label.begin(), n, 1);
  Rng rng(derive_seed(seed, "permutation"));
  auto shuffle = [&] {
    for (std::size_t i = total; i > 1; --i) std::swap(label[i - 1], label[rng.next_u64() % i]);
  };
  std::size_t extreme = 0;

  if (a.cols() == 1) {
    // Sort the pool once; a labelling then gives both within-set sums in one pass.
    std::vector<double> pool(a.data().begin(), a.data().end());
    pool.insert(pool.end(), b.data().begin(), b.data().end());
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return pool[i] < pool[j]; });
    std::vector<double> sorted(total);
    for (std::size_t i = 0; i < total; ++i) sorted[i] = pool[order[i]];
    const double s_pool = sorted_pair_sum(sorted);
    auto statistic = [&](const std::vector<char>& lab) {
      double sa = 0.0, sb = 0.0, ka = 0.0, kb = 0.0;
      for (std::size_t i = 0; i < total; ++i) {
        const double v = sorted[i];
        if (lab[order[i]]) {
          sa += v * (2.0 * ka - dn + 1.0);
          ka += 1.0;
        } else {
          sb += v * (2.0 * kb - dm + 1.0);
          kb += 1.0;
        }
      }
      return energy_from_sums(2.0 * sa, 2.0 * sb, s_pool, dn, dm);
    };
    result.statistic = statistic(label);
    for (std::size_t p = 0; p < permutations; ++p) {
      shuffle();
      if (statistic(label) >= result.statistic) ++extreme;
    }
  } else {
    if (total > 4000) throw InvalidArgument("energy_permutation_test: multivariate pools are limited to 4000 points");
    const std::size_t d = a.cols();
    std::vector<double> pool(a.data().begin(), a.data().end());
    pool.insert(pool.end(), b.data().begin(), b.data().end());
    std::vector<double> dist(total * total);
    for (std::size_t i = 0; i < total; ++i)
      for (std::size_t j = 0; j < total; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
          const double diff = pool[i * d + k] - pool[j * d + k];
          s += diff * diff;
        }
        dist[i * total + j] = std::sqrt(s);
      }
    double s_pool = 0.0;
    for (double v : dist) s_pool += v;
    auto statistic = [&](const std::vector<char>& lab) {
      double sa = 0.0, sb = 0.0;
      for (std::size_t i = 0; i < total; ++i)
        for (std::size_t j = 0; j < total; ++j)
          if (lab[i] == lab[j]) (lab[i] ? sa : sb) += dist[i * total + j];
      return energy_from_sums(sa, sb, s_pool, dn, dm);
    };
    result.statistic = statistic(label);
    for (std::size_t p = 0; p < permutations; ++p) {
      shuffle();
      if (statistic(label) >= result.statistic) ++extreme;
    }
  }
  result.p_value = (1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(permutations));
  result.statistic = std::max(0.0, result.statistic);
  return result;
}

PrecisionRecall knn_precision_recall(const NdArray<double>& real, const NdArray<double>& generated, std::size_t k) {
  require_points(real, "knn_precision_recall");
  require_points(generated, "knn_precision_recall");
  if (real.cols() != generated.cols()) throw ShapeError("knn_precision_recall: dimensions differ");
  if (k == 0 || k >= real.rows() || k >= generated.rows())
    throw InvalidArgument("knn_precision_recall: k must satisfy 1 <= k < set size");
  const auto r_real = kernels::parallel::knn_radii(points(real), k);
  const auto r_gen = kernels::parallel::knn_radii(points(generated), k);
  const auto in_real = kernels::parallel::in_any_ball(points(generated), points(real), r_real);
  const auto in_gen = kernels::parallel::in_any_ball(points(real), points(generated), r_gen);
  PrecisionRecall pr;
  pr.precision = static_cast<double>(std::count(in_real.begin(), in_real.end(), 1)) / double(generated.rows());
  pr.recall = static_cast<double>(std::count(in_gen.begin(), in_gen.end(), 1)) / double(real.rows());
  return pr;
}

void write_metric_csv(const std::filesystem::path& path, const std::vector<MetricReport>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "metric,value,n_a,n_b,seed,half_width\n";
  for (const auto& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%.17g,%zu,%zu,%llu,", r.metric.c_str(), r.value, r.n_a, r.n_b,
                  static_cast<unsigned long long>(r.seed));
    out << buf;
    if (!std::isnan(r.half_width)) {
      std::snprintf(buf, sizeof buf, "%.17g", r.half_width);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace difflab
