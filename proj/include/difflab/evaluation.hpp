// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/metrics.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/normality.hpp"
#include "difflab/sampling.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

struct BiasEntry {
  int t = 0;
  std::size_t count = 0;
  double value = 0.0;  // mean L1 gap per coordinate, or a distribution distance
};

struct BiasTable {
  std::string mode;    // "deterministic" or "stochastic"
  std::string metric;  // "delta_bar", "energy" or "frechet"
  std::vector<BiasEntry> entries;

  std::vector<double> steps() const;
  std::vector<double> values() const;  // entries with count == 0 skipped in both
  void write_csv(const std::filesystem::path& path) const;
};

struct DeterministicBiasOptions {
  std::size_t iterations = 10000;
  /// Steps to draw t from (uniformly). Empty = all of 1..T.
  std::vector<int> t_grid;
  /// Group steps into this many equal-width buckets of 1..T; 0 = one entry per step.
  std::size_t buckets = 0;
  std::uint64_t seed = 0;
};

/// For each of `iterations` draws of (x0, t, eps): x_t from the forward
/// process, x0_hat from the deterministic reverse chain started at x_t, and
/// delta_t += ||x0 - x0_hat||_1 / dim. Reports delta_bar_t = delta_t / n_t.
/// All chains run together: draws are sorted by t and a reverse step is
/// applied to the rows whose start step has been reached.
template <typename Real>
BiasTable exposure_bias_deterministic(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                      const NoiseSchedule& schedule, const DeterministicBiasOptions& options);

enum class DistanceMetric { automatic, energy, frechet };

struct StochasticBiasOptions {
  std::vector<int> t_list;  // t = 0 gives the real-vs-real baseline
  std::size_t n_chains = 1000;
  SamplerConfig sampler;  // kind and variance used for the reverse chains
  /// automatic: energy distance up to 16 dimensions, Frechet distance above.
  DistanceMetric metric = DistanceMetric::automatic;
  std::uint64_t seed = 0;
};

/// For each t: noise n_chains real samples to x_t, run the stochastic reverse
/// chain back to x0_hat and score it against a disjoint held-out real batch.
/// The same two real batches are used for every t. Needs 2 n_chains samples.
template <typename Real>
BiasTable exposure_bias_stochastic(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                   const NoiseSchedule& schedule, const StochasticBiasOptions& options);

struct ErrorStatsOptions {
  /// Steps stride, 1 + k * stride for k = 0, 1, ... (at most T).
  int t_stride = 10;
  std::size_t n_samples = 1000;
  /// 0: eps_hat at the ground-truth x_t (teacher-forced).
  /// L >= 1: x_hat_t is generated by L reverse steps from the ground-truth
  /// x_{t+L} (capped at T) and eps_hat is evaluated there.
  int lead_steps = 1;
  SamplerConfig sampler;  // reverse steps of the generation-side mode
  NormalityTest test = NormalityTest::shapiro_wilk;
  std::size_t normality_subsample = 50;
  /// At most this many coordinates get their own normality test.
  std::size_t max_coordinate_tests = 256;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct ErrorStatsEntry {
  int t = 0;
  std::size_t count = 0;  // error values (samples * dim)
  double mu = 0.0;
  double nu = 0.0;
  bool tested = false;
  // Test on normality_subsample standardized values pooled over coordinates.
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  // Share of per-coordinate tests that reject.
  double coordinate_reject_rate = 0.0;
  std::size_t coordinate_tests = 0;
};

struct ErrorStats {
  std::string mode;  // "teacher_forced" or "generation"
  std::vector<ErrorStatsEntry> entries;
  double mean_nu = 0.0;  // E_t[nu_t]
  void write_csv(const std::filesystem::path& path) const;
};

/// e_t = predict_x0(x_hat_t, eps_hat) - x0 over n_samples data rows at each
/// strided t; mu_t and nu_t over all coordinates; standardized values
/// (e - mu_t) / nu_t go to the normality test. Entries with nu_t = 0 and all
/// errors zero skip the test; nu_t = 0 with nonzero errors raises NumericError.
template <typename Real>
ErrorStats prediction_error_stats(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                  const NoiseSchedule& schedule, const ErrorStatsOptions& options);

struct LipschitzEstimate {
  double max = 0.0;
  double p95 = 0.0;
  std::size_t pairs = 0;
};

/// Ratios ||eps(x, t) - eps(y, t)|| / ||x - y|| for x = q_sample(x0, t, eps)
/// over random data rows and y = x + radius u with u a random unit vector.
template <typename Real>
LipschitzEstimate empirical_lipschitz(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                      const NoiseSchedule& schedule, int t, std::size_t n_pairs, double radius,
                                      std::uint64_t seed);

/// Evenly spaced grid of `points` steps from `lo` to `hi` (rounded, deduplicated).
std::vector<int> step_grid(int lo, int hi, std::size_t points);

}  // namespace difflab
