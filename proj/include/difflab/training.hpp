// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "difflab/autodiff.hpp"
#include "difflab/data.hpp"
#include "difflab/denoiser.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/rng.hpp"
#include "difflab/schedule.hpp"

namespace difflab {

/// standard: plain epsilon regression.
/// ip: the network sees x_t built from eps + gamma xi, the target stays eps.
/// ddpm_y: the network sees x_t built from sqrt(1 + gamma^2) eps', the target is eps'.
/// gp: standard + lambda_gp * ||d eps_theta / d x_t||_F^2.
/// wd: standard + lambda_wd * sum of squared weight-matrix entries.
enum class TrainMode { standard, ip, ddpm_y, gp, wd };

std::string to_string(TrainMode mode);
TrainMode parse_train_mode(const std::string& s);

enum class Precision { float32, float64 };
std::string to_string(Precision p);
Precision parse_precision(const std::string& s);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Decoupled (AdamW) decay. Kept at 0 so that the wd mode's penalty is the only decay.
  double weight_decay = 0.0;
  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

struct TrainConfig {
  TrainMode mode = TrainMode::standard;
  double gamma = 0.1;
  double lambda_gp = 1e-6;
  double lambda_wd = 0.03;
  AdamConfig adam;
  double ema_rate = 0.9999;
  std::size_t batch_size = 128;
  std::int64_t total_iters = 2000;
  /// 0 = only the initial and final checkpoints.
  std::int64_t checkpoint_every = 0;
  std::int64_t log_every = 1;
  /// 0 = no periodic evaluation.
  std::int64_t eval_every = 0;
  Precision precision = Precision::float32;
  ad::JacobianOptions jacobian;
  std::uint64_t seed = 0;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;

  /// Throws InvalidArgument on out-of-range values.
  void validate() const;
};

/// Everything one training step feeds the network. `target` is always a
/// copy of the noise that the loss regresses onto; in ip mode it equals
/// `eps` and never involves `xi`.
template <typename Real>
struct TrainBatch {
  std::vector<int> t;
  NdArray<Real> x0;
  NdArray<Real> eps;
  NdArray<Real> xi;  // empty unless mode == ip
  NdArray<Real> input;
  NdArray<Real> target;
};

/// Draws the noise for a fixed x0 batch. Consumption order from `rng`:
/// t for every row, then eps (row-major), then xi (ip mode only).
/// ddpm_y reuses the eps draw as eps'.
template <typename Real>
TrainBatch<Real> draw_batch(const NdArray<Real>& x0, TrainMode mode, double gamma, const NoiseSchedule& schedule,
                            Rng& rng);

/// Picks batch_size rows of `data` with replacement, then draw_batch.
template <typename Real>
TrainBatch<Real> make_batch(const NdArray<Real>& data, const TrainConfig& config, const NoiseSchedule& schedule,
                            Rng& rng);

/// Mean over all entries of (target - eps_theta(input, t))^2.
template <typename Real>
ad::Tensor<Real> regression_loss(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch);

/// mean_r ||d eps_theta(x, t_r) / d x||_F^2 evaluated at batch.input.
template <typename Real>
ad::Tensor<Real> jacobian_penalty(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch,
                                  const ad::JacobianOptions& options = {});

/// Sum of squared entries of the weight matrices (biases excluded).
template <typename Real>
ad::Tensor<Real> weight_penalty(const MlpDenoiser<Real>& model);

/// The full objective of `config.mode` on a prepared batch.
template <typename Real>
ad::Tensor<Real> training_loss(const MlpDenoiser<Real>& model, const TrainBatch<Real>& batch,
                               const TrainConfig& config);

// Per-mode objectives on an explicit x0 batch, drawing noise from rng as in draw_batch.
template <typename Real>
ad::Tensor<Real> loss_standard(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                               const NoiseSchedule& schedule);
template <typename Real>
ad::Tensor<Real> loss_ip(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double gamma);
template <typename Real>
ad::Tensor<Real> loss_ddpm_y(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                             const NoiseSchedule& schedule, double gamma);
template <typename Real>
ad::Tensor<Real> loss_gp(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double lambda_gp, const ad::JacobianOptions& options = {});
template <typename Real>
ad::Tensor<Real> loss_wd(const MlpDenoiser<Real>& model, const NdArray<Real>& x0, Rng& rng,
                         const NoiseSchedule& schedule, double lambda_wd);

/// Adam with bias correction and optional decoupled weight decay.
template <typename Real>
class Adam {
 public:
  Adam(AdamConfig config, const std::vector<ad::Tensor<Real>>& params);

  /// Applies one update from each parameter's accumulated gradient (missing
  /// gradients count as zero). Throws NumericError on non-finite gradients.
  void step(std::vector<ad::Tensor<Real>>& params);

  std::int64_t steps() const { return steps_; }
  const std::vector<NdArray<Real>>& first_moments() const { return m_; }
  const std::vector<NdArray<Real>>& second_moments() const { return v_; }

 private:
  AdamConfig config_;
  std::int64_t steps_ = 0;
  std::vector<NdArray<Real>> m_, v_;
};

/// ema <- rate * ema + (1 - rate) * params
template <typename Real>
void ema_update(std::vector<NdArray<Real>>& ema, const std::vector<ad::Tensor<Real>>& params, double rate);

/// Fixed-capacity window of recent losses.
class LossHistory {
 public:
  explicit LossHistory(std::size_t capacity = 1000) : capacity_(capacity) {}
  void push(double loss);
  std::size_t size() const { return values_.size(); }
  double mean() const;
  double back() const { return values_.back(); }

 private:
  std::size_t capacity_;
  std::deque<double> values_;
};

struct Checkpoint;

template <typename Real>
struct TrainerState {
  MlpDenoiser<Real> model;
  Adam<Real> optimizer;
  std::vector<NdArray<Real>> ema;
  std::int64_t iteration = 0;
  LossHistory history;

  MlpDenoiser<Real> ema_model() const;
};

/// Extra CSV columns filled every eval_every iterations from the EMA model.
template <typename Real>
struct EvalHook {
  std::vector<std::string> columns;
  std::function<std::vector<double>(const MlpDenoiser<Real>& ema, std::int64_t iteration)> evaluate;
};

struct TrainOutputs {
  /// Empty = keep everything in memory.
  std::filesystem::path directory;
  /// Stored verbatim in each checkpoint manifest.
  std::string metadata_json = "{}";
};

struct StepStats {
  double loss = 0.0;
  double grad_norm = 0.0;
  double weight_frobenius = 0.0;
};

/// Stepwise trainer. All randomness of iteration i comes from
/// Rng(derive_seed(seed, "train", i)), so runs are reproducible and a given
/// iteration's batch does not depend on how earlier ones were consumed.
template <typename Real>
class Trainer {
 public:
  Trainer(NdArray<Real> data, TrainConfig config, ScheduleSpec schedule, MlpArchitecture architecture);

  StepStats step();
  const TrainerState<Real>& state() const { return state_; }
  TrainerState<Real>& state() { return state_; }
  const TrainConfig& config() const { return config_; }
  const NoiseSchedule& schedule() const { return schedule_; }
  Checkpoint checkpoint(const std::string& metadata_json = "{}") const;

 private:
  NdArray<Real> data_;
  TrainConfig config_;
  ScheduleSpec schedule_spec_;
  NoiseSchedule schedule_;
  TrainerState<Real> state_;
};

/// Runs config.total_iters steps. With an output directory it writes
/// train_log.csv and checkpoints ckpt_<iteration>.ddck (the initial one,
/// every checkpoint_every iterations, and the last one).
template <typename Real>
TrainerState<Real> train(const Dataset& dataset, const TrainConfig& config, const ScheduleSpec& schedule,
                         const MlpArchitecture& architecture, const TrainOutputs& outputs = {},
                         const EvalHook<Real>* hook = nullptr);

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, std::int64_t iteration);

}  // namespace difflab
