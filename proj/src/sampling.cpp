// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "difflab/errors.hpp"

namespace difflab {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::ancestral: return "ancestral";
    case SamplerKind::deterministic: return "deterministic";
    case SamplerKind::ddim: return "ddim";
  }
  return "?";
}

SamplerKind parse_sampler_kind(const std::string& s) {
  for (auto k : {SamplerKind::ancestral, SamplerKind::deterministic, SamplerKind::ddim})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown sampler kind '" + s + "'");
}

std::string to_string(VarianceChoice v) { return v == VarianceChoice::posterior_small ? "posterior_small" : "beta_large"; }

VarianceChoice parse_variance_choice(const std::string& s) {
  if (s == "posterior_small") return VarianceChoice::posterior_small;
  if (s == "beta_large") return VarianceChoice::beta_large;
  throw InvalidArgument("unknown variance choice '" + s + "'");
}

void SamplerConfig::validate() const {
  if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidArgument("eta must lie in [0, 1]");
  if (steps < 0) throw InvalidArgument("sampler steps must be >= 0");
}

StepTable make_step_table(const NoiseSchedule& s) {
  StepTable t;
  for (int k = 1; k <= s.steps(); ++k) {
    t.steps.push_back(k);
    t.alpha.push_back(s.alpha(k));
    t.beta.push_back(s.beta(k));
    t.alpha_bar.push_back(s.alpha_bar(k));
    t.alpha_bar_prev.push_back(s.alpha_bar(k - 1));
    t.posterior_var.push_back(s.posterior_variance(k));
  }
  return t;
}

StepTable make_step_table(const RespacedSchedule& r) {
  StepTable t;
  t.steps.assign(r.steps().begin(), r.steps().end());
  t.alpha.assign(r.effective_alphas().begin(), r.effective_alphas().end());
  t.beta.assign(r.effective_betas().begin(), r.effective_betas().end());
  t.alpha_bar.assign(r.effective_alpha_bars().begin(), r.effective_alpha_bars().end());
  t.posterior_var.assign(r.effective_posterior_variances().begin(), r.effective_posterior_variances().end());
  for (int i = 0; i < r.size(); ++i) t.alpha_bar_prev.push_back(r.alpha_bar_prev(i));
  return t;
}

StepTable make_step_table(const NoiseSchedule& schedule, int steps) {
  if (steps == 0) return make_step_table(schedule);
  return make_step_table(respace(schedule, steps));
}

namespace {

double ddim_sigma(const StepTable& table, int i, double eta) {
  const double ab = table.alpha_bar[i], abp = table.alpha_bar_prev[i];
  return eta * std::sqrt((1.0 - abp) / (1.0 - ab)) * std::sqrt(1.0 - ab / abp);
}

}  // namespace

bool step_uses_noise(const StepTable& table, int i, const SamplerConfig& config) {
  if (i == 0) return false;
  switch (config.kind) {
    case SamplerKind::ancestral: return true;
    case SamplerKind::deterministic: return false;
    case SamplerKind::ddim: return ddim_sigma(table, i, config.eta) > 0.0;
  }
  return false;
}

template <typename Real>
NdArray<Real> reverse_step(const EpsilonPredictor<Real>& model, const NdArray<Real>& x, const StepTable& table, int i,
                           const SamplerConfig& config, const NdArray<Real>* z) {
  if (i < 0 || i >= table.size()) throw InvalidArgument("reverse step index " + std::to_string(i) + " out of range");
  const bool noisy = step_uses_noise(table, i, config);
  if (noisy) {
    if (!z) throw InvalidArgument("reverse_step needs noise at index " + std::to_string(i));
    require_same_shape(*z, x, "reverse_step noise");
  }
  const int step = table.steps[i];
  const NdArray<Real> eps = model.predict(x, std::span<const int>(&step, 1));
  require_same_shape(eps, x, "reverse_step model output");

  NdArray<Real> out(x.shape());
  if (config.kind == SamplerKind::ddim) {
    const double ab = table.alpha_bar[i], abp = table.alpha_bar_prev[i];
    const double sigma = ddim_sigma(table, i, config.eta);
    const Real c_x0 = static_cast<Real>(std::sqrt(abp));
    const Real noise_in = static_cast<Real>(std::sqrt(1.0 - ab)), signal_in = static_cast<Real>(std::sqrt(ab));
    const Real c_eps = static_cast<Real>(std::sqrt(std::max(0.0, 1.0 - abp - sigma * sigma)));
    const Real c_z = static_cast<Real>(sigma);
    for (std::size_t k = 0; k < x.size(); ++k) {
      const Real x0 = (x[k] - noise_in * eps[k]) / signal_in;
      out[k] = c_x0 * x0 + c_eps * eps[k];
      if (noisy) out[k] += c_z * (*z)[k];
    }
  } else {
    const Real inv_sqrt_alpha = static_cast<Real>(1.0 / std::sqrt(table.alpha[i]));
    const Real c_eps = static_cast<Real>(table.beta[i] / std::sqrt(1.0 - table.alpha_bar[i]));
    const double var = config.variance == VarianceChoice::posterior_small ? table.posterior_var[i] : table.beta[i];
    const Real c_z = static_cast<Real>(std::sqrt(var));
    for (std::size_t k = 0; k < x.size(); ++k) {
      out[k] = inv_sqrt_alpha * (x[k] - c_eps * eps[k]);
      if (noisy) out[k] += c_z * (*z)[k];
    }
  }
  if (!out.all_finite()) throw NumericError("non-finite sampler state at step " + std::to_string(step));
  return out;
}

std::vector<Rng> chain_streams(std::uint64_t seed, std::size_t n) {
  std::vector<Rng> rngs;
  rngs.reserve(n);
  for (std::size_t c = 0; c < n; ++c) rngs.emplace_back(derive_seed(seed, "chain", c));
  return rngs;
}

template <typename Real>
SampleResult<Real> run_chain(const EpsilonPredictor<Real>& model, NdArray<Real> x, const StepTable& table, int start,
                             const SamplerConfig& config, std::vector<Rng>& chain_rngs) {
  config.validate();
  if (start < 0 || start > table.size()) throw InvalidArgument("chain start outside the step table");
  if (chain_rngs.size() != x.rows()) throw InvalidArgument("need one noise stream per chain");
  SampleResult<Real> result;
  if (config.record_trajectory) result.states.push_back(x);
  NdArray<Real> z(x.shape());
  const std::size_t d = x.cols();
  for (int i = start - 1; i >= 0; --i) {
    const bool noisy = step_uses_noise(table, i, config);
    if (noisy) {
      const auto n = static_cast<std::ptrdiff_t>(x.rows());
#pragma omp parallel for schedule(static) if (n >= 256)
      for (std::ptrdiff_t c = 0; c < n; ++c)
        chain_rngs[static_cast<std::size_t>(c)].fill_normal(z.data().subspan(static_cast<std::size_t>(c) * d, d));
    }
    x = reverse_step(model, x, table, i, config, noisy ? &z : nullptr);
    ++result.steps_executed;
    if (config.record_trajectory) result.states.push_back(x);
  }
  result.final = std::move(x);
  return result;
}

template <typename Real>
SampleResult<Real> sample(const EpsilonPredictor<Real>& model, std::size_t n, std::size_t dim,
                          const NoiseSchedule& schedule, const SamplerConfig& config) {
  config.validate();
  if (n == 0 || dim == 0) throw InvalidArgument("sample needs n >= 1 and dim >= 1");
  const StepTable table = make_step_table(schedule, config.steps);
  auto rngs = chain_streams(config.seed, n);
  NdArray<Real> x(Shape{n, dim});
  for (std::size_t c = 0; c < n; ++c) rngs[c].fill_normal(x.row(c));
  return run_chain(model, std::move(x), table, table.size(), config, rngs);
}

template <typename Real>
SampleResult<Real> reverse_from(const EpsilonPredictor<Real>& model, const NdArray<Real>& xt, int t,
                                const NoiseSchedule& schedule, const SamplerConfig& config) {
  if (t != 0) schedule.check_step(t);
  const StepTable table = make_step_table(schedule);
  auto rngs = chain_streams(config.seed, xt.rows());
  return run_chain(model, xt, table, t, config, rngs);
}

#define DIFFLAB_INSTANTIATE(R)                                                                                    \
  template NdArray<R> reverse_step(const EpsilonPredictor<R>&, const NdArray<R>&, const StepTable&, int,          \
                                   const SamplerConfig&, const NdArray<R>*);                                      \
  template SampleResult<R> run_chain(const EpsilonPredictor<R>&, NdArray<R>, const StepTable&, int,               \
                                     const SamplerConfig&, std::vector<Rng>&);                                    \
  template SampleResult<R> sample(const EpsilonPredictor<R>&, std::size_t, std::size_t, const NoiseSchedule&,     \
                                  const SamplerConfig&);                                                          \
  template SampleResult<R> reverse_from(const EpsilonPredictor<R>&, const NdArray<R>&, int, const NoiseSchedule&, \
                                        const SamplerConfig&);
DIFFLAB_INSTANTIATE(float)
DIFFLAB_INSTANTIATE(double)
#undef DIFFLAB_INSTANTIATE

}  // namespace difflab
