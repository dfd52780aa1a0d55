// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "difflab/ndarray.hpp"

namespace difflab {

enum class DatasetKind { gaussian, gaussian_mixture, two_moons, swiss_roll, idx_images };

std::string to_string(DatasetKind kind);
DatasetKind parse_dataset_kind(const std::string& s);

/// Generator parameters. Fields irrelevant to `kind` are ignored.
struct DatasetSpec {
  DatasetKind kind = DatasetKind::gaussian_mixture;
  std::size_t n = 10000;
  // gaussian: N(mean, stddev^2 I); dim = mean.size()
  std::vector<double> mean{0.0, 0.0};
  double stddev = 0.5;
  // gaussian_mixture: `modes` components evenly spaced on a circle
  std::size_t modes = 8;
  double radius = 1.0;
  double mode_stddev = 0.05;
  std::vector<double> weights;  // empty = uniform
  // two_moons, swiss_roll: isotropic Gaussian jitter before rescaling
  double noise = 0.05;
  // idx_images
  std::string path;

  friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// Samples in the [-1, 1] box, one per row of `samples`.
///
/// Synthetic sets are produced by a generator, translated by `-center` and
/// then multiplied by `scale` (1 unless the largest coordinate would leave
/// [-0.95, 0.95]). Keeping both lets callers map back to generator units:
/// raw = sample / scale + center.
struct Dataset {
  DatasetKind kind = DatasetKind::gaussian;
  NdArray<double> samples;
  std::vector<int> labels;  // mixture component / moon; empty when meaningless
  std::vector<double> center;
  double scale = 1.0;
  std::size_t image_rows = 0, image_cols = 0;  // idx_images only
  std::string source;

  std::size_t size() const { return samples.rows(); }
  std::size_t dim() const { return samples.cols(); }
};

/// Deterministic given (spec, seed). Throws InvalidArgument on bad parameters.
Dataset make_synthetic(const DatasetSpec& spec, std::uint64_t seed);

/// make_synthetic, or load_idx(spec.path) for idx_images (keeping at most spec.n images; 0 = all).
Dataset load_dataset(const DatasetSpec& spec, std::uint64_t seed);

/// Reads unsigned-byte IDX image files (magic 0x00000803): pixels map to p / 127.5 - 1.
Dataset load_idx(const std::filesystem::path& path);

/// Writes [n, rows*cols] images in [-1, 1] as an IDX u8 rank-3 file.
void save_idx(const std::filesystem::path& path, const NdArray<double>& images, std::size_t rows, std::size_t cols);

/// Inverse of the IDX normalization: round((v + 1) * 127.5) clamped to [0, 255].
std::uint8_t to_pixel(double v);

/// Tiles images into a single P5 PGM, `grid_cols` images per row.
void write_pgm_grid(const std::filesystem::path& path, const NdArray<double>& images, std::size_t rows,
                    std::size_t cols, std::size_t grid_cols = 8);

/// One row per sample, columns x0..x{d-1}, with a header.
void write_points_csv(const std::filesystem::path& path, const NdArray<double>& points);
NdArray<double> read_points_csv(const std::filesystem::path& path);

/// Random subset of rows without replacement.
NdArray<double> sample_rows(const NdArray<double>& data, std::size_t n, std::uint64_t seed);

}  // namespace difflab
