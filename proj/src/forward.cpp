// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/forward.hpp"

#include <cmath>

#include "difflab/errors.hpp"

namespace difflab {

namespace {

// Step for row r; a single-element span broadcasts over the batch.
int step_of_row(std::span<const int> t, std::size_t r) { return t.size() == 1 ? t[0] : t[r]; }

template <typename Real>
void check_steps(const NdArray<Real>& x, std::span<const int> t, const NoiseSchedule& s) {
  if (t.size() != 1 && t.size() != x.rows())
    throw ShapeError("need one step or one step per row (" + std::to_string(t.size()) + " steps for " +
                     std::to_string(x.rows()) + " rows)");
  for (int v : t) s.check_step(v);
}

// out = a_r * x + b_r * n, with row coefficients from coef(t_r).
template <typename Real, typename Coef>
NdArray<Real> affine_rows(const NdArray<Real>& x, std::span<const int> t, const NdArray<Real>& n, Coef coef) {
  NdArray<Real> out(x.shape());
  const std::size_t c = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto [a, b] = coef(step_of_row(t, r));
    const Real ar = static_cast<Real>(a), br = static_cast<Real>(b);
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = ar * x[r * c + j] + br * n[r * c + j];
  }
  return out;
}

}  // namespace

template <typename Real>
NdArray<Real> forward_step(const NdArray<Real>& x_prev, int t, const NoiseSchedule& schedule, Rng& rng) {
  schedule.check_step(t);
  NdArray<Real> z(x_prev.shape());
  rng.fill_normal(z.data());
  const double beta = schedule.beta(t);
  return affine_rows(x_prev, std::span<const int>(&t, 1), z,
                     [&](int) { return std::pair{std::sqrt(1.0 - beta), std::sqrt(beta)}; });
}

template <typename Real>
NdArray<Real> q_sample(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps,
                       const NoiseSchedule& schedule) {
  require_same_shape(x0, eps, "q_sample");
  check_steps(x0, t, schedule);
  return affine_rows(x0, t, eps, [&](int s) {
    const double ab = schedule.alpha_bar(s);
    return std::pair{std::sqrt(ab), std::sqrt(1.0 - ab)};
  });
}

template <typename Real>
NdArray<Real> q_sample_perturbed(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps,
                                 const NdArray<Real>& xi, double gamma, const NoiseSchedule& schedule) {
  if (gamma < 0.0) throw InvalidArgument("gamma must be non-negative");
  require_same_shape(x0, xi, "q_sample_perturbed");
  if (gamma == 0.0) return q_sample(x0, t, eps, schedule);
  require_same_shape(x0, eps, "q_sample_perturbed");
  NdArray<Real> noise(eps.shape());
  const Real g = static_cast<Real>(gamma);
  for (std::size_t i = 0; i < noise.size(); ++i) noise[i] = eps[i] + g * xi[i];
  return q_sample(x0, t, noise, schedule);
}

template <typename Real>
NdArray<Real> q_sample_scaled(const NdArray<Real>& x0, std::span<const int> t, const NdArray<Real>& eps_prime,
                              double gamma, const NoiseSchedule& schedule) {
  if (gamma < 0.0) throw InvalidArgument("gamma must be non-negative");
  require_same_shape(x0, eps_prime, "q_sample_scaled");
  check_steps(x0, t, schedule);
  const double inflate = std::sqrt(1.0 + gamma * gamma);
  return affine_rows(x0, t, eps_prime, [&](int s) {
    const double ab = schedule.alpha_bar(s);
    return std::pair{std::sqrt(ab), std::sqrt(1.0 - ab) * inflate};
  });
}

template <typename Real>
NdArray<Real> predict_x0(const NdArray<Real>& xt, std::span<const int> t, const NdArray<Real>& eps_hat,
                         const NoiseSchedule& schedule) {
  require_same_shape(xt, eps_hat, "predict_x0");
  check_steps(xt, t, schedule);
  NdArray<Real> out(xt.shape());
  const std::size_t c = xt.cols();
  for (std::size_t r = 0; r < xt.rows(); ++r) {
    const int s = step_of_row(t, r);
    const double ab = schedule.alpha_bar(s);
    if (!(ab > kMinAlphaBar))
      throw NumericError("alpha_bar at step " + std::to_string(s) + " is below the invertibility threshold");
    const Real noise = static_cast<Real>(std::sqrt(1.0 - ab));
    const Real signal = static_cast<Real>(std::sqrt(ab));
    for (std::size_t j = 0; j < c; ++j) out[r * c + j] = (xt[r * c + j] - noise * eps_hat[r * c + j]) / signal;
  }
  return out;
}

#define DIFFLAB_INSTANTIATE(Real)                                                                                 \
  template NdArray<Real> forward_step(const NdArray<Real>&, int, const NoiseSchedule&, Rng&);                    \
  template NdArray<Real> q_sample(const NdArray<Real>&, std::span<const int>, const NdArray<Real>&,              \
                                  const NoiseSchedule&);                                                         \
  template NdArray<Real> q_sample_perturbed(const NdArray<Real>&, std::span<const int>, const NdArray<Real>&,    \
                                            const NdArray<Real>&, double, const NoiseSchedule&);                 \
  template NdArray<Real> q_sample_scaled(const NdArray<Real>&, std::span<const int>, const NdArray<Real>&,       \
                                         double, const NoiseSchedule&);                                          \
  template NdArray<Real> predict_x0(const NdArray<Real>&, std::span<const int>, const NdArray<Real>&,            \
                                    const NoiseSchedule&);
DIFFLAB_INSTANTIATE(float)
DIFFLAB_INSTANTIATE(double)
#undef DIFFLAB_INSTANTIATE

}  // namespace difflab
