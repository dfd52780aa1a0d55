// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/rng.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

/// ancestral: the stochastic reverse chain.
/// deterministic: the same update with the noise term dropped.
/// ddim: the eta-parameterized implicit update (eta = 0 is deterministic).
enum class SamplerKind { ancestral, deterministic, ddim };

/// Variance of the ancestral noise: the posterior variance sigma_t^2 or beta_t.
enum class VarianceChoice { posterior_small, beta_large };

std::string to_string(SamplerKind kind);
SamplerKind parse_sampler_kind(const std::string& s);
std::string to_string(VarianceChoice v);
VarianceChoice parse_variance_choice(const std::string& s);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::ancestral;
  double eta = 0.0;
  VarianceChoice variance = VarianceChoice::posterior_small;
  /// Number of reverse steps T'. 0 runs every step of the schedule directly;
  /// any other value goes through respacing (T' = T included).
  int steps = 0;
  std::uint64_t seed = 0;
  bool record_trajectory = false;
  friend bool operator==(const SamplerConfig&, const SamplerConfig&) = default;

  void validate() const;
};

/// Coefficients of the executed reverse chain, index 0 = the final step.
/// `steps[i]` is the step the model is conditioned on.
struct StepTable {
  std::vector<int> steps;
  std::vector<double> alpha, beta, alpha_bar, alpha_bar_prev, posterior_var;
  int size() const { return static_cast<int>(steps.size()); }
};

StepTable make_step_table(const NoiseSchedule& schedule);
StepTable make_step_table(const RespacedSchedule& respaced);
/// make_step_table(schedule) when steps == 0, otherwise of respace(schedule, steps).
StepTable make_step_table(const NoiseSchedule& schedule, int steps);

template <typename Real>
struct SampleResult {
  NdArray<Real> final;
  /// x at every visited step, from the start down to x_0, when recorded.
  std::vector<NdArray<Real>> states;
  int steps_executed = 0;
};

/// One reverse update from table index i (x at step steps[i]) to index i-1.
/// `z` supplies the Gaussian noise; it is ignored by the deterministic kind,
/// on the last step (i == 0) and when eta == 0, and may then be null.
template <typename Real>
NdArray<Real> reverse_step(const EpsilonPredictor<Real>& model, const NdArray<Real>& x, const StepTable& table, int i,
                           const SamplerConfig& config, const NdArray<Real>* z);

/// True when reverse_step at index i consumes noise.
bool step_uses_noise(const StepTable& table, int i, const SamplerConfig& config);

/// Draws n chains of dimension dim from N(0, I) and runs the full chain.
/// Chain c draws x_T and then its per-step noise from
/// Rng(derive_seed(config.seed, "chain", c)), so output does not depend on
/// the thread count or on n.
template <typename Real>
SampleResult<Real> sample(const EpsilonPredictor<Real>& model, std::size_t n, std::size_t dim,
                          const NoiseSchedule& schedule, const SamplerConfig& config);

/// Runs the unrespaced chain from x_t at step t down to x_0 (t = 0 returns
/// x_t). Chain c draws its noise from the same stream as in sample(), without
/// the x_T draw.
template <typename Real>
SampleResult<Real> reverse_from(const EpsilonPredictor<Real>& model, const NdArray<Real>& xt, int t,
                                const NoiseSchedule& schedule, const SamplerConfig& config);

/// Runs table indices [start - 1, ..., 0] from x with caller-provided per-chain streams.
template <typename Real>
SampleResult<Real> run_chain(const EpsilonPredictor<Real>& model, NdArray<Real> x, const StepTable& table, int start,
                             const SamplerConfig& config, std::vector<Rng>& chain_rngs);

std::vector<Rng> chain_streams(std::uint64_t seed, std::size_t n);

}  // namespace difflab
