// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "difflab/data.hpp"
#include "difflab/denoiser.hpp"
#include "difflab/normality.hpp"
#include "difflab/sampling.hpp"
#include "difflab/schedule.hpp"
#include "difflab/training.hpp"

namespace difflab {

struct ModelSpec {
  std::vector<std::size_t> hidden{256, 256, 256, 256};
  std::size_t embed_dim = 64;
  double max_period = 10000.0;
  Activation activation = Activation::silu;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

  MlpArchitecture architecture(std::size_t data_dim) const;
};

struct SampleSpec {
  SamplerConfig sampler;  // its seed is derived from the master seed
  std::size_t n = 1000;
  bool use_ema = true;
  friend bool operator==(const SampleSpec&, const SampleSpec&) = default;
};

struct EvaluationSpec {
  std::vector<int> bias_t_grid{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::size_t bias_iterations = 2000;
  std::size_t bias_chains = 1000;
  int errstats_stride = 10;
  std::size_t errstats_samples = 500;
  int errstats_lead_steps = 1;
  NormalityTest normality_test = NormalityTest::shapiro_wilk;
  int lipschitz_t = 100;
  std::size_t lipschitz_pairs = 1000;
  double lipschitz_radius = 0.01;
  std::size_t metric_samples = 2000;
  std::size_t knn_k = 3;
  friend bool operator==(const EvaluationSpec&, const EvaluationSpec&) = default;
};

/// One experiment. Stream seeds (data, training, sampling, probes) are all
/// derived from `seed`; see derive_seeds().
struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "runs/default";
  DatasetSpec dataset;
  ScheduleSpec schedule;
  ModelSpec model;
  TrainConfig train;
  SampleSpec sample;
  EvaluationSpec evaluation;
  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;

  /// Sets train.seed, train.jacobian.probe_seed and sample.sampler.seed from `seed`.
  void derive_seeds();
  std::uint64_t data_seed() const;
};

/// Throws InvalidArgument naming the offending key on unknown keys or bad values.
ExperimentConfig config_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& c);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

/// DIFFLAB_OUTPUT_DIR replaces output_dir. Returns DIFFLAB_THREADS if set.
std::optional<int> apply_env_overrides(ExperimentConfig& c);

}  // namespace difflab
