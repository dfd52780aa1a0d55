// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

constexpr double kBoxMargin = 0.95;

void rescale_into_box(Dataset& ds) {
  const std::size_t d = ds.dim();
  auto& v = ds.samples.storage();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= ds.center[i % d];
  double peak = 0.0;
  for (double x : v) peak = std::max(peak, std::abs(x));
  ds.scale = peak > kBoxMargin ? kBoxMargin / peak : 1.0;
  if (ds.scale != 1.0)
    for (double& x : v) x *= ds.scale;
}

Dataset make_gaussian(const DatasetSpec& spec, Rng& rng) {
  if (spec.mean.empty()) throw InvalidArgument("gaussian dataset needs a non-empty mean");
  if (!(spec.stddev >= 0.0)) throw InvalidArgument("gaussian dataset needs stddev >= 0");
  const std::size_t d = spec.mean.size();
  Dataset ds;
  ds.kind = DatasetKind::gaussian;
  ds.samples = NdArray<double>(Shape{spec.n, d});
  for (std::size_t i = 0; i < spec.n; ++i)
    for (std::size_t j = 0; j < d; ++j) ds.samples[i * d + j] = spec.mean[j] + spec.stddev * rng.normal();
  ds.center.assign(d, 0.0);
  return ds;
}

Dataset make_mixture(const DatasetSpec& spec, Rng& rng) {
  if (spec.modes == 0) throw InvalidArgument("gaussian_mixture needs at least one mode");
  if (!(spec.mode_stddev >= 0.0) || !(spec.radius >= 0.0))
    throw InvalidArgument("gaussian_mixture needs radius >= 0 and mode_stddev >= 0");
  std::vector<double> w = spec.weights.empty() ? std::vector<double>(spec.modes, 1.0 / double(spec.modes)) : spec.weights;
  if (w.size() != spec.modes) throw InvalidArgument("gaussian_mixture: one weight per mode required");
  for (double x : w)
    if (!(x >= 0.0)) throw InvalidArgument("gaussian_mixture: weights must be nonnegative");
  if (std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) > 1e-9)
    throw InvalidArgument("gaussian_mixture: weights must sum to 1");
  std::vector<double> cdf(w.size());
  std::partial_sum(w.begin(), w.end(), cdf.begin());

  Dataset ds;
  ds.kind = DatasetKind::gaussian_mixture;
  ds.samples = NdArray<double>(Shape{spec.n, 2});
  ds.labels.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double u = rng.uniform();
    auto k = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    k = std::min(k, spec.modes - 1);
    const double angle = 2.0 * std::numbers::pi * double(k) / double(spec.modes);
    ds.samples[2 * i] = spec.radius * std::cos(angle) + spec.mode_stddev * rng.normal();
    ds.samples[2 * i + 1] = spec.radius * std::sin(angle) + spec.mode_stddev * rng.normal();
    ds.labels[i] = static_cast<int>(k);
  }
  ds.center = {0.0, 0.0};
  return ds;
}

// Upper moon: unit half-circle at the origin. Lower moon: the same arc
// flipped and shifted to (1, 0.5). Exactly half the points per moon.
Dataset make_two_moons(const DatasetSpec& spec, Rng& rng) {
  if (!(spec.noise >= 0.0)) throw InvalidArgument("two_moons needs noise >= 0");
  Dataset ds;
  ds.kind = DatasetKind::two_moons;
  ds.samples = NdArray<double>(Shape{spec.n, 2});
  ds.labels.resize(spec.n);
  const std::size_t n_outer = spec.n / 2;
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double theta = std::numbers::pi * rng.uniform();
    const bool outer = i < n_outer;
    const double x = outer ? std::cos(theta) : 1.0 - std::cos(theta);
    const double y = outer ? std::sin(theta) : 0.5 - std::sin(theta);
    ds.samples[2 * i] = x + spec.noise * rng.normal();
    ds.samples[2 * i + 1] = y + spec.noise * rng.normal();
    ds.labels[i] = outer ? 0 : 1;
  }
  // Interleave the moons so any prefix is balanced.
  std::vector<std::size_t> order(spec.n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = spec.n; i > 1; --i) std::swap(order[i - 1], order[rng.next_u64() % i]);
  NdArray<double> shuffled(Shape{spec.n, 2});
  std::vector<int> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    shuffled[2 * i] = ds.samples[2 * order[i]];
    shuffled[2 * i + 1] = ds.samples[2 * order[i] + 1];
    labels[i] = ds.labels[order[i]];
  }
  ds.samples = std::move(shuffled);
  ds.labels = std::move(labels);
  ds.center = {0.5, 0.25};
  return ds;
}

// 2-D swiss roll: s = 1.5 pi (1 + 2u), point (s cos s, s sin s).
Dataset make_swiss_roll(const DatasetSpec& spec, Rng& rng) {
  if (!(spec.noise >= 0.0)) throw InvalidArgument("swiss_roll needs noise >= 0");
  Dataset ds;
  ds.kind = DatasetKind::swiss_roll;
  ds.samples = NdArray<double>(Shape{spec.n, 2});
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double s = 1.5 * std::numbers::pi * (1.0 + 2.0 * rng.uniform());
    ds.samples[2 * i] = s * std::cos(s) + spec.noise * rng.normal();
    ds.samples[2 * i + 1] = s * std::sin(s) + spec.noise * rng.normal();
  }
  ds.center = {0.0, 0.0};
  return ds;
}

std::uint32_t read_be32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("IDX file truncated in header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}

void write_be32(std::ostream& os, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::gaussian: return "gaussian";
    case DatasetKind::gaussian_mixture: return "gaussian_mixture";
    case DatasetKind::two_moons: return "two_moons";
    case DatasetKind::swiss_roll: return "swiss_roll";
    case DatasetKind::idx_images: return "idx_images";
  }
  return "?";
}

DatasetKind parse_dataset_kind(const std::string& s) {
  for (auto k : {DatasetKind::gaussian, DatasetKind::gaussian_mixture, DatasetKind::two_moons,
                 DatasetKind::swiss_roll, DatasetKind::idx_images})
    if (to_string(k) == s) return k;
  throw InvalidArgument("unknown dataset kind '" + s + "'");
}

Dataset make_synthetic(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.n == 0) throw InvalidArgument("dataset size must be positive");
  Rng rng(derive_seed(seed, "dataset"));
  Dataset ds;
  switch (spec.kind) {
    case DatasetKind::gaussian: ds = make_gaussian(spec, rng); break;
    case DatasetKind::gaussian_mixture: ds = make_mixture(spec, rng); break;
    case DatasetKind::two_moons: ds = make_two_moons(spec, rng); break;
    case DatasetKind::swiss_roll: ds = make_swiss_roll(spec, rng); break;
    case DatasetKind::idx_images: throw InvalidArgument("idx_images is loaded from a file, not generated");
  }
  rescale_into_box(ds);
  ds.source = "synthetic:" + to_string(spec.kind) + ":seed=" + std::to_string(seed);
  return ds;
}

Dataset load_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  if (spec.kind != DatasetKind::idx_images) return make_synthetic(spec, seed);
  Dataset ds = load_idx(spec.path);
  if (spec.n > 0 && spec.n < ds.size()) ds.samples = ds.samples.slice_rows(0, spec.n);
  return ds;
}

Dataset load_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open IDX file " + path.string());
  const std::uint32_t magic = read_be32(in);
  if ((magic >> 16) != 0) throw FormatError("bad IDX magic in " + path.string());
  const std::uint32_t dtype = (magic >> 8) & 0xff, rank = magic & 0xff;
  if (dtype != 0x08) throw FormatError("unsupported IDX dtype code " + std::to_string(dtype) + " (only u8)");
  if (rank != 3) throw FormatError("expected a rank-3 IDX image file, got rank " + std::to_string(rank));
  const std::size_t n = read_be32(in), rows = read_be32(in), cols = read_be32(in);
  if (n == 0) throw FormatError("IDX file " + path.string() + " holds no images");
  if (rows == 0 || cols == 0) throw FormatError("IDX image dimensions must be positive");

  std::vector<unsigned char> bytes(n * rows * cols);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw FormatError("IDX file " + path.string() + " is truncated");

  Dataset ds;
  ds.kind = DatasetKind::idx_images;
  ds.samples = NdArray<double>(Shape{n, rows * cols});
  for (std::size_t i = 0; i < bytes.size(); ++i) ds.samples[i] = bytes[i] / 127.5 - 1.0;
  ds.center.assign(rows * cols, 0.0);
  ds.image_rows = rows;
  ds.image_cols = cols;
  ds.source = path.string();
  return ds;
}

std::uint8_t to_pixel(double v) {
  const double p = std::round((v + 1.0) * 127.5);
  return static_cast<std::uint8_t>(std::clamp(std::isnan(p) ? 0.0 : p, 0.0, 255.0));
}

void save_idx(const std::filesystem::path& path, const NdArray<double>& images, std::size_t rows, std::size_t cols) {
  if (images.cols() != rows * cols) throw ShapeError("save_idx: image width does not match rows*cols");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_be32(out, 0x00000803);
  write_be32(out, static_cast<std::uint32_t>(images.rows()));
  write_be32(out, static_cast<std::uint32_t>(rows));
  write_be32(out, static_cast<std::uint32_t>(cols));
  std::vector<unsigned char> bytes(images.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_pixel(images[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void write_pgm_grid(const std::filesystem::path& path, const NdArray<double>& images, std::size_t rows,
                    std::size_t cols, std::size_t grid_cols) {
  if (images.cols() != rows * cols) throw ShapeError("write_pgm_grid: image width does not match rows*cols");
  if (images.rows() == 0 || grid_cols == 0) throw InvalidArgument("write_pgm_grid: nothing to draw");
  const std::size_t n = images.rows();
  const std::size_t gc = std::min(grid_cols, n), gr = (n + gc - 1) / gc;
  const std::size_t width = gc * cols, height = gr * rows;
  std::vector<unsigned char> canvas(width * height, 0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t oy = (k / gc) * rows, ox = (k % gc) * cols;
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) canvas[(oy + r) * width + ox + c] = to_pixel(images.at(k, r * cols + c));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(canvas.data()), static_cast<std::streamsize>(canvas.size()));
}

void write_points_csv(const std::filesystem::path& path, const NdArray<double>& points) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const std::size_t d = points.cols();
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < points.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", points.at(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

NdArray<double> read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + " is empty");
  const std::size_t d = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<double> values;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError(path.string() + ": not a number '" + cell + "'");
      }
      ++k;
    }
    if (k != d) throw FormatError(path.string() + ": row " + std::to_string(n + 1) + " has the wrong column count");
    ++n;
  }
  if (n == 0) throw FormatError(path.string() + " has no data rows");
  return NdArray<double>(Shape{n, d}, std::move(values));
}

NdArray<double> sample_rows(const NdArray<double>& data, std::size_t n, std::uint64_t seed) {
  if (n > data.rows()) throw InvalidArgument("sample_rows: asked for more rows than available");
  std::vector<std::size_t> idx(data.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.next_u64() % (idx.size() - i)]);
  NdArray<double> out(Shape{n, data.cols()});
  for (std::size_t i = 0; i < n; ++i) std::copy_n(data.row(idx[i]).begin(), data.cols(), out.row(i).begin());
  return out;
}

}  // namespace difflab
