// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "difflab/ndarray.hpp"
#include "difflab/rng.hpp"
#include "difflab/schedule.hpp"

// Forward-process sampling and its closed-form inversion. Inputs are
// [batch, dim] arrays; every operation accepts either one step for the
// whole batch or one step per row.
namespace difflab {

/// Smallest alpha_bar for which predict_x0 will divide by sqrt(alpha_bar).
inline constexpr double kMinAlphaBar = 1e-30;

/// One Markov step: sqrt(1 - beta_t) x_{t-1} + sqrt(beta_t) z, z drawn from rng.
template <typename Real>
NdArray<Real> forward_step(const NdArray<Real>& x_prev, int t, const NoiseSchedule& schedule, Rng& rng);

/// x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps
template <typename Real>
NdArray<Real> q_sample(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps,
                       const NoiseSchedule& schedule);

/// y_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) (eps + gamma xi)
/// gamma == 0 short-circuits to q_sample.
template <typename Real>
NdArray<Real> q_sample_perturbed(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps,
                                 const NdArray<Real>& xi, double gamma, const NoiseSchedule& schedule);

/// y_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) sqrt(1 + gamma^2) eps'
template <typename Real>
NdArray<Real> q_sample_scaled(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps_prime,
                              double gamma, const NoiseSchedule& schedule);

/// x0_hat = (x_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t)
template <typename Real>
NdArray<Real> predict_x0(const NdArray<Real>& xt, std::span<const int> t, const NdArray<Real>& eps_hat,
                         const NoiseSchedule& schedule);

// Single-step conveniences.
template <typename Real>
NdArray<Real> q_sample(const NdArray<Real>& x0, int t, const NdArray<Real>& eps, const NoiseSchedule& s) {
  return q_sample(x0, std::span<const int>(&t, 1), eps, s);
}
template <typename Real>
NdArray<Real> q_sample_perturbed(const NdArray<Real>& x0, int t, const NdArray<Real>& eps, const NdArray<Real>& xi,
                                 double gamma, const NoiseSchedule& s) {
  return q_sample_perturbed(x0, std::span<const int>(&t, 1), eps, xi, gamma, s);
}
template <typename Real>
NdArray<Real> q_sample_scaled(const NdArray<Real>& x0, int t, const NdArray<Real>& eps_prime, double gamma,
                              const NoiseSchedule& s) {
  return q_sample_scaled(x0, std::span<const int>(&t, 1), eps_prime, gamma, s);
}
template <typename Real>
NdArray<Real> predict_x0(const NdArray<Real>& xt, int t, const NdArray<Real>& eps_hat, const NoiseSchedule& s) {
  return predict_x0(xt, std::span<const int>(&t, 1), eps_hat, s);
}

}  // namespace difflab
