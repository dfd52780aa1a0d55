// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include "difflab/autodiff.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

/// Anything that maps a noisy batch x_t [n, d] and per-row steps to an
/// epsilon estimate of the same shape. A single-element `t` applies to all rows.
template <typename Real>
class EpsilonPredictor {
 public:
  virtual ~EpsilonPredictor() = default;
  virtual NdArray<Real> predict(const NdArray<Real>& x, std::span<const int> t) const = 0;
  NdArray<Real> predict(const NdArray<Real>& x, int t) const { return predict(x, std::span<const int>(&t, 1)); }
};

enum class Activation { silu, relu };

struct MlpArchitecture {
  std::size_t data_dim = 2;
  std::vector<std::size_t> hidden{256, 256, 256, 256};
  std::size_t embed_dim = 64;
  double max_period = 10000.0;
  Activation activation = Activation::silu;

  /// [data_dim + embed_dim, hidden..., data_dim]
  std::vector<std::size_t> layer_sizes() const;
  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// Time-conditioned MLP: the sinusoidal embedding of t is concatenated to
/// x_t and passed through affine layers with the chosen activation between
/// them (none after the last layer).
///
/// Parameters are leaf tensors ordered [W0, b0, W1, b1, ...], W_l of shape
/// [in, out]. Copies are deep.
template <typename Real>
class MlpDenoiser final : public EpsilonPredictor<Real> {
 public:
  MlpDenoiser(MlpArchitecture arch, std::vector<NdArray<Real>> params);
  MlpDenoiser(const MlpDenoiser& other);
  MlpDenoiser& operator=(const MlpDenoiser& other);
  MlpDenoiser(MlpDenoiser&&) noexcept = default;
  MlpDenoiser& operator=(MlpDenoiser&&) noexcept = default;

  const MlpArchitecture& architecture() const { return arch_; }

  /// Differentiable forward pass.
  ad::Tensor<Real> forward(const ad::Tensor<Real>& x, std::span<const int> t) const;
  using EpsilonPredictor<Real>::predict;
  NdArray<Real> predict(const NdArray<Real>& x, std::span<const int> t) const override;

  std::vector<ad::Tensor<Real>>& parameters() { return params_; }
  const std::vector<ad::Tensor<Real>>& parameters() const { return params_; }
  /// The weight matrices only (biases excluded).
  std::vector<ad::Tensor<Real>> weights() const;
  std::vector<NdArray<Real>> parameter_values() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  MlpArchitecture arch_;
  std::vector<ad::Tensor<Real>> params_;
};

/// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from per-layer streams of
/// `seed`; biases zero.
template <typename Real>
MlpDenoiser<Real> init_mlp(const MlpArchitecture& arch, std::uint64_t seed);

/// Layer-size form: sizes.front() must equal data_dim + embed_dim and
/// sizes.back() must equal data_dim.
template <typename Real>
MlpDenoiser<Real> init_mlp(const std::vector<std::size_t>& layer_sizes, std::size_t embed_dim, std::uint64_t seed,
                           Activation activation = Activation::silu);

/// Closed-form E[eps | x_t] when the data law is N(mu0, sigma0^2 I):
///   sqrt(1 - abar) (x - sqrt(abar) mu0) / (abar sigma0^2 + 1 - abar)
template <typename Real>
class AnalyticGaussianDenoiser final : public EpsilonPredictor<Real> {
 public:
  AnalyticGaussianDenoiser(std::vector<double> mu0, double sigma0_sq, NoiseSchedule schedule);

  using EpsilonPredictor<Real>::predict;
  NdArray<Real> predict(const NdArray<Real>& x, std::span<const int> t) const override;

  const std::vector<double>& mean() const { return mu0_; }
  double variance() const { return sigma0_sq_; }

 private:
  std::vector<double> mu0_;
  double sigma0_sq_;
  NoiseSchedule schedule_;
};

/// Either a trained MLP or the analytic Gaussian oracle.
template <typename Real>
class EpsilonModel final : public EpsilonPredictor<Real> {
 public:
  using Variant = std::variant<MlpDenoiser<Real>, AnalyticGaussianDenoiser<Real>>;

  explicit EpsilonModel(Variant v) : model_(std::move(v)) {}

  bool is_mlp() const { return std::holds_alternative<MlpDenoiser<Real>>(model_); }
  const MlpDenoiser<Real>& mlp() const { return std::get<MlpDenoiser<Real>>(model_); }
  MlpDenoiser<Real>& mlp() { return std::get<MlpDenoiser<Real>>(model_); }

  using EpsilonPredictor<Real>::predict;
  NdArray<Real> predict(const NdArray<Real>& x, std::span<const int> t) const override {
    return std::visit([&](const auto& m) { return m.predict(x, t); }, model_);
  }

 private:
  Variant model_;
};

/// Range- and shape-checked prediction.
template <typename Real>
NdArray<Real> predict_eps(const EpsilonPredictor<Real>& model, const NdArray<Real>& xt, std::span<const int> t,
                          const NoiseSchedule& schedule);

}  // namespace difflab
