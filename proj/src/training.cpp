// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "difflab/checkpoint.hpp"
#include "difflab/errors.hpp"
#include "difflab/forward.hpp"

namespace difflab {

std::string to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::standard: return "standard";
    case TrainMode::ip: return "ip";
    case TrainMode::ddpm_y: return "ddpm_y";
    case TrainMode::gp: return "gp";
    case TrainMode::wd: return "wd";
  }
  return "?";
}

TrainMode parse_train_mode(const std::string& s) {
  for (auto m : {TrainMode::standard, TrainMode::ip, TrainMode::ddpm_y, TrainMode::gp, TrainMode::wd})
    if (to_string(m) == s) return m;
  throw InvalidArgument("unknown training mode '" + s + "'");
}

std::string to_string(Precision p) { return p == Precision::float32 ? "float32" : "float64"; }

Precision parse_precision(const std::string& s) {
  if (s == "float32") return Precision::float32;
  if (s == "float64") return Precision::float64;
  throw InvalidArgument("unknown precision '" + s + "' (float32 or float64)");
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(std::string("train config: ") + what);
  };
  require(gamma >= 0.0, "gamma must be >= 0");
  require(lambda_gp >= 0.0, "lambda_gp must be >= 0");
  require(lambda_wd >= 0.0, "lambda_wd must be >= 0");
  require(adam.lr > 0.0, "lr must be > 0");
  require(adam.beta1 >= 0.0 && adam.beta1 < 1.0, "beta1 must lie in [0, 1)");
  require(adam.beta2 >= 0.0 && adam.beta2 < 1.0, "beta2 must lie in [0, 1)");
  require(adam.eps > 0.0, "eps must be > 0");
  require(adam.weight_decay >= 0.0, "weight_decay must be >= 0");
  require(ema_rate >= 0.0 && ema_rate < 1.0, "ema_rate must lie in [0, 1)");
  require(batch_size > 0, "batch_size must be positive");
  require(total_iters >= 0, "total_iters must be >= 0");
  require(checkpoint_every >= 0 && log_every >= 0 && eval_every >= 0, "cadences must be >= 0");
}

template <typename Real>
TrainBatch<Real> draw_batch(const NdArray<Real>& x0, TrainMode mode, double gamma, const NoiseSchedule& schedule,
                            Rng& rng) {
  if (x0.rows() == 0 || x0.rank() != 2) throw InvalidArgument("training needs a non-empty [batch, dim] x0");
  if (gamma < 0.0) throw InvalidArgument("gamma must be >= 0");
  TrainBatch<Real> b;
  b.x0 = x0;
  b.t.resize(x0.rows());
  for (auto& s : b.t) s = rng.uniform_int(1, schedule.steps());
  b.eps = NdArray<Real>(x0.shape());
  rng.fill_normal(b.eps.data());
  switch (mode) {
    case TrainMode::ip:
      b.xi = NdArray<Real>(x0.shape());
      rng.fill_normal(b.xi.data());
      b.input = q_sample_perturbed(x0, b.t, b.eps, b.xi, gamma, schedule);
      break;
    case TrainMode::ddpm_y:
      b.input = q_sample_scaled(x0, b.t, b.eps, gamma, schedule);
      break;
    default:
      b.input = q_sample(x0, b.t, b.eps, schedule);
  }
  b.target = b.eps;
  return b;
}

template <typename Real>
TrainBatch<Real> make_batch(const NdArray<Real>& data, const TrainConfig& config, const NoiseSchedule& schedule,
                            Rng& rng) {
  if (data.rows() == 0) throw InvalidArgument("training data is empty");
  const std::size_t d = data.cols();
  NdArray<Real> x0(Shape{config.batch_size, d});
  for (std::size_t i = 0; i < config.batch_size; ++i) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.rows()) - 1));
    std::copy_n(data.row(r).begin(), d, x0.row(i).begin());
  }
  return draw_batch(x0, config.mode, config.gamma, schedule, rng);
}

template <typename Real>
ad::Tensor<Real> regression_loss(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch) {
  auto pred = model.forward(ad::Tensor<Real>(batch.input), batch.t);
  return ad::mean(ad::square(ad::sub(pred, ad::Tensor<Real>(batch.target))));
}

template <typename Real>
ad::Tensor<Real> jacobian_penalty(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch,
                                  const ad::JacobianOptions& options) {
  const std::function<ad::Tensor<Real>(const ad::Tensor<Real>&)> f = [&](const ad::Tensor<Real>& x) {
    return model.forward(x, batch.t);
  };
  return ad::jacobian_frobenius_sq(f, batch.input, options);
}

template <typename Real>
ad::Tensor<Real> weight_penalty(const MlpDenoiser<Real>& model) {
  ad::Tensor<Real> total;
  for (const auto& w : model.weights()) {
    auto term = ad::sum(ad::square(w));
    total = total.defined() ? ad::add(total, term) : term;
  }
  return total;
}

template <typename Real>
ad::Tensor<Real> training_loss(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch,
                               const TrainConfig& config) {
  auto loss = regression_loss(model, batch);
  if (config.mode == TrainMode::gp && config.lambda_gp != 0.0)
    return ad::add(loss, ad::scale(jacobian_penalty(model, batch, config.jacobian), static_cast<Real>(config.lambda_gp)));
  if (config.mode == TrainMode::wd && config.lambda_wd != 0.0)
    return ad::add(loss, ad::scale(weight_penalty(model), static_cast<Real>(config.lambda_wd)));
  return loss;
}

template <typename Real>
ad::Tensor<Real> loss_standard(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                               const NoiseSchedule& schedule) {
  return regression_loss(model, draw_batch(x0, TrainMode::standard, 0.0, schedule, rng));
}

template <typename Real>
ad::Tensor<Real> loss_ip(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double gamma) {
  return regression_loss(model, draw_batch(x0, TrainMode::ip, gamma, schedule, rng));
}

template <typename Real>
ad::Tensor<Real> loss_ddpm_y(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                             const NoiseSchedule& schedule, double gamma) {
  return regression_loss(model, draw_batch(x0, TrainMode::ddpm_y, gamma, schedule, rng));
}

template <typename Real>
ad::Tensor<Real> loss_gp(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double lambda_gp, const ad::JacobianOptions& options) {
  TrainConfig config;
  config.mode = TrainMode::gp;
  config.lambda_gp = lambda_gp;
  config.jacobian = options;
  return training_loss(model, draw_batch(x0, TrainMode::gp, 0.0, schedule, rng), config);
}

template <typename Real>
ad::Tensor<Real> loss_wd(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double lambda_wd) {
  TrainConfig config;
  config.mode = TrainMode::wd;
  config.lambda_wd = lambda_wd;
  return training_loss(model, draw_batch(x0, TrainMode::wd, 0.0, schedule, rng), config);
}

template <typename Real>
Adam<Real>::Adam(AdamConfig config, const std::vector<ad::Tensor<Real>>& params) : config_(config) {
  for (const auto& p : params) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

template <typename Real>
void Adam<Real>::step(std::vector<ad::Tensor<Real>>& params) {
  if (params.size() != m_.size()) throw ShapeError("optimizer: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* g = params[i].grad();
    if (g && g->shape() != params[i].shape()) throw ShapeError("optimizer: gradient shape mismatch");
    if (g && !g->all_finite())
      throw NumericError("non-finite gradient in parameter tensor " + std::to_string(i) + " at optimizer step " +
                         std::to_string(steps_ + 1));
  }
  ++steps_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto* g = params[i].grad();
    auto& theta = params[i].mutable_value();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      const double gj = g ? static_cast<double>((*g)[j]) : 0.0;
      const double mj = b1 * m[j] + (1.0 - b1) * gj;
      const double vj = b2 * v[j] + (1.0 - b2) * gj * gj;
      m[j] = static_cast<Real>(mj);
      v[j] = static_cast<Real>(vj);
      const double update = (mj / c1) / (std::sqrt(vj / c2) + config_.eps) + config_.weight_decay * theta[j];
      theta[j] = static_cast<Real>(theta[j] - config_.lr * update);
    }
  }
}

template <typename Real>
void ema_update(std::vector<NdArray<Real>>& ema, const std::vector<ad::Tensor<Real>>& params, double rate) {
  if (ema.size() != params.size()) throw ShapeError("EMA and parameter counts differ");
  const Real r = static_cast<Real>(rate), q = static_cast<Real>(1.0 - rate);
  for (std::size_t i = 0; i < ema.size(); ++i) {
    require_same_shape(ema[i], params[i].value(), "ema_update");
    const auto& p = params[i].value();
    for (std::size_t j = 0; j < p.size(); ++j) ema[i][j] = r * ema[i][j] + q * p[j];
  }
}

void LossHistory::push(double loss) {
  if (capacity_ == 0) return;
  if (values_.size() == capacity_) values_.pop_front();
  values_.push_back(loss);
}

double LossHistory::mean() const {
  if (values_.empty()) return 0.0;
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

template <typename Real>
MlpDenoiser<Real> TrainerState<Real>::ema_model() const {
  return MlpDenoiser<Real>(model.architecture(), ema);
}

namespace {

template <typename Real>
TrainerState<Real> initial_state(const TrainConfig& config, const MlpArchitecture& arch) {
  auto model = init_mlp<Real>(arch, derive_seed(config.seed, "init"));
  Adam<Real> adam(config.adam, model.parameters());
  auto ema = model.parameter_values();
  return TrainerState<Real>{std::move(model), std::move(adam), std::move(ema), 0, LossHistory{}};
}

std::vector<NdArray<double>> to_double(const auto& xs) {
  std::vector<NdArray<double>> out;
  for (const auto& x : xs) {
    if constexpr (requires { x.value(); })
      out.push_back(x.value().template cast<double>());
    else
      out.push_back(x.template cast<double>());
  }
  return out;
}

}  // namespace

template <typename Real>
Trainer<Real>::Trainer(NdArray<Real> data, TrainConfig config, ScheduleSpec schedule, MlpArchitecture architecture)
    : data_(std::move(data)),
      config_(std::move(config)),
      schedule_spec_(schedule),
      schedule_(make_schedule(schedule)),
      state_(initial_state<Real>(config_, architecture)) {
  config_.validate();
  if (data_.rows() == 0) throw InvalidArgument("training data is empty");
  if (data_.cols() != architecture.data_dim)
    throw ShapeError("data dimension " + std::to_string(data_.cols()) + " does not match the model's " +
                     std::to_string(architecture.data_dim));
}

template <typename Real>
StepStats Trainer<Real>::step() {
  Rng rng(derive_seed(config_.seed, "train", static_cast<std::uint64_t>(state_.iteration)));
  const auto batch = make_batch(data_, config_, schedule_, rng);
  auto& params = state_.model.parameters();
  for (auto& p : params) p.clear_grad();

  auto loss = training_loss(state_.model, batch, config_);
  StepStats stats;
  stats.loss = static_cast<double>(loss.item());
  if (!std::isfinite(stats.loss))
    throw NumericError("non-finite loss at iteration " + std::to_string(state_.iteration));
  ad::backward(loss);

  double g2 = 0.0;
  for (const auto& p : params)
    if (const auto* g = p.grad())
      for (Real v : g->data()) g2 += static_cast<double>(v) * v;
  stats.grad_norm = std::sqrt(g2);

  state_.optimizer.step(params);
  ema_update(state_.ema, params, config_.ema_rate);
  ++state_.iteration;
  state_.history.push(stats.loss);

  double w2 = 0.0;
  for (const auto& w : state_.model.weights())
    for (Real v : w.value().data()) w2 += static_cast<double>(v) * v;
  stats.weight_frobenius = std::sqrt(w2);
  return stats;
}

template <typename Real>
Checkpoint Trainer<Real>::checkpoint(const std::string& metadata_json) const {
  Checkpoint c;
  c.architecture = state_.model.architecture();
  c.schedule = schedule_spec_;
  c.mode = config_.mode;
  c.gamma = (config_.mode == TrainMode::ip || config_.mode == TrainMode::ddpm_y) ? config_.gamma : 0.0;
  c.step = state_.iteration;
  c.precision = std::is_same_v<Real, float> ? Precision::float32 : Precision::float64;
  c.params = to_double(state_.model.parameters());
  c.ema = to_double(state_.ema);
  c.metadata_json = metadata_json;
  return c;
}

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::int64_t iteration) {
  char name[40];
  std::snprintf(name, sizeof name, "ckpt_%08lld.ddck", static_cast<long long>(iteration));
  return dir / name;
}

template <typename Real>
TrainerState<Real> train(const Dataset& dataset, const TrainConfig& config, const ScheduleSpec& schedule,
                         const MlpArchitecture& architecture, const TrainOutputs& outputs, const EvalHook<Real>* hook) {
  Trainer<Real> trainer(dataset.samples.cast<Real>(), config, schedule, architecture);
  const bool persist = !outputs.directory.empty();
  std::ofstream log;
  if (persist) {
    std::filesystem::create_directories(outputs.directory);
    log.open(outputs.directory / "train_log.csv");
    if (!log) throw IoError("cannot write " + (outputs.directory / "train_log.csv").string());
    log << "iter,wall_ms,loss,grad_norm,weight_frobenius";
    if (hook)
      for (const auto& c : hook->columns) log << ',' << c;
    log << '\n';
    save_checkpoint(checkpoint_path(outputs.directory, 0), trainer.checkpoint(outputs.metadata_json));
  }

  const auto start = std::chrono::steady_clock::now();
  std::int64_t last_saved = 0;
  for (std::int64_t it = 1; it <= config.total_iters; ++it) {
    const StepStats s = trainer.step();
    const bool eval_now = hook && config.eval_every > 0 && it % config.eval_every == 0;
    std::vector<double> evals;
    if (eval_now) evals = hook->evaluate(trainer.state().ema_model(), it);
    if (persist && ((config.log_every > 0 && it % config.log_every == 0) || eval_now)) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      char buf[160];
      std::snprintf(buf, sizeof buf, "%lld,%.1f,%.9g,%.9g,%.9g", static_cast<long long>(it), ms, s.loss, s.grad_norm,
                    s.weight_frobenius);
      log << buf;
      if (hook)
        for (std::size_t k = 0; k < hook->columns.size(); ++k) {
          log << ',';
          if (eval_now && k < evals.size()) log << evals[k];
        }
      log << '\n';
    }
    if (persist && config.checkpoint_every > 0 && it % config.checkpoint_every == 0) {
      save_checkpoint(checkpoint_path(outputs.directory, it), trainer.checkpoint(outputs.metadata_json));
      last_saved = it;
    }
  }
  if (persist && config.total_iters > 0 && last_saved != config.total_iters)
    save_checkpoint(checkpoint_path(outputs.directory, config.total_iters), trainer.checkpoint(outputs.metadata_json));
  return std::move(trainer.state());
}

#define DIFFLAB_INSTANTIATE(R)                                                                                     \
  template TrainBatch<R> draw_batch(const NdArray<R>&, TrainMode, double, const NoiseSchedule&, Rng&);             \
  template TrainBatch<R> make_batch(const NdArray<R>&, const TrainConfig&, const NoiseSchedule&, Rng&);            \
  template ad::Tensor<R> regression_loss(const MlpDenoiser<R>&, const TrainBatch<R>&);                             \
  template ad::Tensor<R> jacobian_penalty(const MlpDenoiser<R>&, const TrainBatch<R>&, const ad::JacobianOptions&); \
  template ad::Tensor<R> weight_penalty(const MlpDenoiser<R>&);                                                    \
  template ad::Tensor<R> training_loss(const MlpDenoiser<R>&, const TrainBatch<R>&, const TrainConfig&);           \
  template ad::Tensor<R> loss_standard(const MlpDenoiser<R>&, const NdArray<R>&, Rng&, const NoiseSchedule&);      \
  template ad::Tensor<R> loss_ip(const MlpDenoiser<R>&, const NdArray<R>&, Rng&, const NoiseSchedule&, double);    \
  template ad::Tensor<R> loss_ddpm_y(const MlpDenoiser<R>&, const NdArray<R>&, Rng&, const NoiseSchedule&,         \
                                     double);                                                                      \
  template ad::Tensor<R> loss_gp(const MlpDenoiser<R>&, const NdArray<R>&, Rng&, const NoiseSchedule&, double,     \
                                 const ad::JacobianOptions&);                                                      \
  template ad::Tensor<R> loss_wd(const MlpDenoiser<R>&, const NdArray<R>&, Rng&, const NoiseSchedule&, double);    \
  template class Adam<R>;                                                                                          \
  template void ema_update(std::vector<NdArray<R>>&, const std::vector<ad::Tensor<R>>&, double);                   \
  template struct TrainerState<R>;                                                                                 \
  template class Trainer<R>;                                                                                       \
  template TrainerState<R> train(const Dataset&, const TrainConfig&, const ScheduleSpec&, const MlpArchitecture&,  \
                                 const TrainOutputs&, const EvalHook<R>*);

DIFFLAB_INSTANTIATE(float)
DIFFLAB_INSTANTIATE(double)
#undef DIFFLAB_INSTANTIATE

}  // namespace difflab
