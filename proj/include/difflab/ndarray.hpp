// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace difflab {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

/// Dense row-major array of reals. Rank-2 arrays are treated as
/// [rows, cols] batches throughout the library; higher ranks flatten their
/// trailing dimensions into cols().
template <typename Real>
class NdArray {
 public:
  using value_type = Real;

  NdArray() = default;
  explicit NdArray(Shape shape, Real fill = Real(0));
  NdArray(Shape shape, std::vector<Real> data);

  static NdArray scalar(Real v) { return NdArray(Shape{}, std::vector<Real>{v}); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  std::size_t rows() const { return shape_.empty() ? 1 : shape_[0]; }
  std::size_t cols() const { return rows() == 0 ? 0 : size() / rows(); }

  std::span<Real> data() { return data_; }
  std::span<const Real> data() const { return data_; }
  std::vector<Real>& storage() { return data_; }
  const std::vector<Real>& storage() const { return data_; }

  Real& operator[](std::size_t i) { return data_[i]; }
  const Real& operator[](std::size_t i) const { return data_[i]; }
  Real& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  const Real& at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

  std::span<Real> row(std::size_t r) { return std::span<Real>(data_).subspan(r * cols(), cols()); }
  std::span<const Real> row(std::size_t r) const {
    return std::span<const Real>(data_).subspan(r * cols(), cols());
  }

  Real item() const;
  bool all_finite() const;
  NdArray reshaped(Shape shape) const;
  /// Copy of rows [begin, end).
  NdArray slice_rows(std::size_t begin, std::size_t end) const;

  template <typename Other>
  NdArray<Other> cast() const {
    std::vector<Other> out(data_.begin(), data_.end());
    return NdArray<Other>(shape_, std::move(out));
  }

  friend bool operator==(const NdArray&, const NdArray&) = default;

 private:
  Shape shape_;
  std::vector<Real> data_;
};

/// Throws ShapeError unless both arrays have identical shapes.
template <typename A, typename B>
void require_same_shape(const NdArray<A>& a, const NdArray<B>& b, const char* what);

// Tensor blob layout (little-endian):
//   "DLTN" | u32 dtype (1 = float32, 2 = float64) | u32 rank | u64 dims[rank] | data
enum class DType : std::uint32_t { float32 = 1, float64 = 2 };

template <typename Real>
void write_tensor(std::ostream& os, const NdArray<Real>& a);
/// Reads one blob, converting to Real when the stored dtype differs.
template <typename Real>
NdArray<Real> read_tensor(std::istream& is);

template <typename Real>
void save_tensor(const std::filesystem::path& path, const NdArray<Real>& a);
template <typename Real>
NdArray<Real> load_tensor(const std::filesystem::path& path);

// Little-endian primitives shared by the binary formats.
void write_u32(std::ostream& os, std::uint32_t v);
void write_u64(std::ostream& os, std::uint64_t v);
std::uint32_t read_u32(std::istream& is);
std::uint64_t read_u64(std::istream& is);

}  // namespace difflab
