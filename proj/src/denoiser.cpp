// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/denoiser.hpp"

#include <cmath>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

std::vector<std::size_t> MlpArchitecture::layer_sizes() const {
  std::vector<std::size_t> sizes{data_dim + embed_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(data_dim);
  return sizes;
}

template <typename Real>
MlpDenoiser<Real>::MlpDenoiser(MlpArchitecture arch, std::vector<NdArray<Real>> params) : arch_(std::move(arch)) {
  if (arch_.data_dim == 0) throw InvalidArgument("data_dim must be positive");
  if (arch_.embed_dim % 2 != 0) throw InvalidArgument("embed_dim must be even");
  const auto sizes = arch_.layer_sizes();
  if (params.size() != 2 * (sizes.size() - 1))
    throw ShapeError("expected " + std::to_string(2 * (sizes.size() - 1)) + " parameter tensors, got " +
                     std::to_string(params.size()));
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const Shape w{sizes[l], sizes[l + 1]}, b{1, sizes[l + 1]};
    if (params[2 * l].shape() != w || params[2 * l + 1].shape() != b)
      throw ShapeError("layer " + std::to_string(l) + " parameters do not match the architecture");
  }
  params_.reserve(params.size());
  for (auto& p : params) params_.emplace_back(std::move(p), true);
}

template <typename Real>
MlpDenoiser<Real>::MlpDenoiser(const MlpDenoiser& other) : MlpDenoiser(other.arch_, other.parameter_values()) {}

template <typename Real>
MlpDenoiser<Real>& MlpDenoiser<Real>::operator=(const MlpDenoiser& other) {
  if (this != &other) *this = MlpDenoiser(other);
  return *this;
}

template <typename Real>
ad::Tensor<Real> MlpDenoiser<Real>::forward(const ad::Tensor<Real>& x, std::span<const int> t) const {
  if (x.shape().size() != 2 || x.cols() != arch_.data_dim)
    throw ShapeError("MLP input must be [n, " + std::to_string(arch_.data_dim) + "], got " + shape_string(x.shape()));
  std::vector<int> steps(t.begin(), t.end());
  if (steps.size() == 1 && x.rows() != 1) steps.assign(x.rows(), t[0]);
  if (steps.size() != x.rows()) throw ShapeError("MLP needs one step per row");

  ad::Tensor<Real> h = x;
  if (arch_.embed_dim > 0)
    h = ad::concat_cols(x, ad::Tensor<Real>(ad::timestep_embedding<Real>(steps, arch_.embed_dim, arch_.max_period)));
  const std::size_t layers = params_.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = ad::add(ad::matmul(h, params_[2 * l]), params_[2 * l + 1]);
    if (l + 1 < layers) h = arch_.activation == Activation::silu ? ad::silu(h) : ad::relu(h);
  }
  return h;
}

template <typename Real>
NdArray<Real> MlpDenoiser<Real>::predict(const NdArray<Real>& x, std::span<const int> t) const {
  ad::NoGradGuard no_grad;
  return forward(ad::Tensor<Real>(x), t).value();
}

template <typename Real>
std::vector<ad::Tensor<Real>> MlpDenoiser<Real>::weights() const {
  std::vector<ad::Tensor<Real>> w;
  for (std::size_t i = 0; i < params_.size(); i += 2) w.push_back(params_[i]);
  return w;
}

template <typename Real>
std::vector<NdArray<Real>> MlpDenoiser<Real>::parameter_values() const {
  std::vector<NdArray<Real>> v;
  v.reserve(params_.size());
  for (const auto& p : params_) v.push_back(p.value());
  return v;
}

template <typename Real>
std::size_t MlpDenoiser<Real>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.size();
  return n;
}

template <typename Real>
bool MlpDenoiser<Real>::all_finite() const {
  for (const auto& p : params_)
    if (!p.value().all_finite()) return false;
  return true;
}

template <typename Real>
MlpDenoiser<Real> init_mlp(const MlpArchitecture& arch, std::uint64_t seed) {
  const auto sizes = arch.layer_sizes();
  std::vector<NdArray<Real>> params;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    NdArray<Real> w(Shape{sizes[l], sizes[l + 1]});
    Rng rng(derive_seed(seed, "mlp-init", l));
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    for (auto& v : w.data()) v = static_cast<Real>((2.0 * rng.uniform() - 1.0) * bound);
    params.push_back(std::move(w));
    params.emplace_back(Shape{1, sizes[l + 1]});
  }
  return MlpDenoiser<Real>(arch, std::move(params));
}

template <typename Real>
MlpDenoiser<Real> init_mlp(const std::vector<std::size_t>& layer_sizes, std::size_t embed_dim, std::uint64_t seed,
                           Activation activation) {
  if (layer_sizes.size() < 2) throw InvalidArgument("an MLP needs at least an input and an output width");
  if (layer_sizes.front() <= embed_dim || layer_sizes.front() - embed_dim != layer_sizes.back())
    throw InvalidArgument("input width must equal data width + embedding width and output width must equal data width");
  MlpArchitecture arch;
  arch.data_dim = layer_sizes.back();
  arch.embed_dim = embed_dim;
  arch.hidden.assign(layer_sizes.begin() + 1, layer_sizes.end() - 1);
  arch.activation = activation;
  return init_mlp<Real>(arch, seed);
}

template <typename Real>
AnalyticGaussianDenoiser<Real>::AnalyticGaussianDenoiser(std::vector<double> mu0, double sigma0_sq,
                                                         NoiseSchedule schedule)
    : mu0_(std::move(mu0)), sigma0_sq_(sigma0_sq), schedule_(std::move(schedule)) {
  if (mu0_.empty()) throw InvalidArgument("analytic denoiser needs a non-empty mean");
  if (!(sigma0_sq_ >= 0.0)) throw InvalidArgument("analytic denoiser needs sigma0^2 >= 0");
}

template <typename Real>
NdArray<Real> AnalyticGaussianDenoiser<Real>::predict(const NdArray<Real>& x, std::span<const int> t) const {
  if (x.cols() != mu0_.size()) throw ShapeError("analytic denoiser: dimension mismatch");
  if (t.size() != 1 && t.size() != x.rows()) throw ShapeError("analytic denoiser needs one step per row");
  NdArray<Real> out(x.shape());
  const std::size_t d = mu0_.size();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const int s = t.size() == 1 ? t[0] : t[r];
    schedule_.check_step(s);
    const double ab = schedule_.alpha_bar(s);
    const double gain = std::sqrt(1.0 - ab) / (ab * sigma0_sq_ + 1.0 - ab);
    const double shift = std::sqrt(ab);
    for (std::size_t j = 0; j < d; ++j)
      out[r * d + j] = static_cast<Real>(gain * (static_cast<double>(x[r * d + j]) - shift * mu0_[j]));
  }
  return out;
}

template <typename Real>
NdArray<Real> predict_eps(const EpsilonPredictor<Real>& model, const NdArray<Real>& xt, std::span<const int> t,
                          const NoiseSchedule& schedule) {
  for (int s : t) schedule.check_step(s);
  auto out = model.predict(xt, t);
  require_same_shape(out, xt, "predict_eps");
  return out;
}

template class MlpDenoiser<float>;
template class MlpDenoiser<double>;
template class AnalyticGaussianDenoiser<float>;
template class AnalyticGaussianDenoiser<double>;
template MlpDenoiser<float> init_mlp(const MlpArchitecture&, std::uint64_t);
template MlpDenoiser<double> init_mlp(const MlpArchitecture&, std::uint64_t);
template MlpDenoiser<float> init_mlp(const std::vector<std::size_t>&, std::size_t, std::uint64_t, Activation);
template MlpDenoiser<double> init_mlp(const std::vector<std::size_t>&, std::size_t, std::uint64_t, Activation);
template NdArray<float> predict_eps(const EpsilonPredictor<float>&, const NdArray<float>&, std::span<const int>,
                                    const NoiseSchedule&);
template NdArray<double> predict_eps(const EpsilonPredictor<double>&, const NdArray<double>&, std::span<const int>,
                                     const NoiseSchedule&);

}  // namespace difflab
