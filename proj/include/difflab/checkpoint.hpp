// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difflab/denoiser.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/schedule.hpp"
#include "difflab/training.hpp"

namespace difflab {

/// A trained MLP with everything needed to sample from it.
///
/// File layout: "DDCK" | u32 manifest length | manifest (UTF-8 JSON) |
/// parameter blobs | EMA blobs, the blobs in the tensor format of
/// ndarray.hpp and stored in `precision`. The manifest holds the
/// architecture, schedule, training mode, gamma, optimizer step count,
/// tensor counts and a free-form `metadata` object. Nothing time-dependent
/// is stored, so identical runs give byte-identical files.
struct Checkpoint {
  MlpArchitecture architecture;
  ScheduleSpec schedule;
  TrainMode mode = TrainMode::standard;
  double gamma = 0.0;
  std::int64_t step = 0;
  Precision precision = Precision::float32;
  std::vector<NdArray<double>> params;
  std::vector<NdArray<double>> ema;
  std::string metadata_json = "{}";

  /// The EMA weights when `use_ema` (and present), else the raw ones.
  template <typename Real>
  MlpDenoiser<Real> model(bool use_ema = true) const;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Hex FNV-1a 64 digest of a file's bytes.
std::string file_digest(const std::filesystem::path& path);

// Digest of the stored weights alone; runs that differ only in recorded settings share it.
std::string parameter_digest(const Checkpoint& ckpt);

}  // namespace difflab
