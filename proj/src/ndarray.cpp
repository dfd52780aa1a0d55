// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/ndarray.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "difflab/errors.hpp"

namespace difflab {

static_assert(std::endian::native == std::endian::little, "tensor IO assumes a little-endian host");

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename Real>
NdArray<Real>::NdArray(Shape shape, Real fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

template <typename Real>
NdArray<Real>::NdArray(Shape shape, std::vector<Real> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

template <typename Real>
Real NdArray<Real>::item() const {
  if (data_.size() != 1) throw ShapeError("item() on array of shape " + shape_string(shape_));
  return data_[0];
}

template <typename Real>
bool NdArray<Real>::all_finite() const {
  for (Real v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

template <typename Real>
NdArray<Real> NdArray<Real>::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size())
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return NdArray(std::move(shape), data_);
}

template <typename Real>
NdArray<Real> NdArray<Real>::slice_rows(std::size_t begin, std::size_t end) const {
  if (begin > end || end > rows()) throw ShapeError("row slice out of range");
  Shape s = shape_;
  if (s.empty()) throw ShapeError("slice_rows on a scalar");
  s[0] = end - begin;
  const std::size_t c = cols();
  return NdArray(std::move(s), std::vector<Real>(data_.begin() + begin * c, data_.begin() + end * c));
}

template <typename A, typename B>
void require_same_shape(const NdArray<A>& a, const NdArray<B>& b, const char* what) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
}

void write_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
void write_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); }

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) throw FormatError("truncated stream (u32)");
  return v;
}

std::uint64_t read_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 8)) throw FormatError("truncated stream (u64)");
  return v;
}

namespace {
constexpr char kMagic[4] = {'D', 'L', 'T', 'N'};

template <typename Real>
constexpr DType dtype_of() {
  return sizeof(Real) == 4 ? DType::float32 : DType::float64;
}

template <typename Stored, typename Real>
std::vector<Real> read_payload(std::istream& is, std::size_t n) {
  std::vector<Stored> raw(n);
  if (n && !is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(Stored))))
    throw FormatError("truncated tensor payload");
  return std::vector<Real>(raw.begin(), raw.end());
}
}  // namespace

template <typename Real>
void write_tensor(std::ostream& os, const NdArray<Real>& a) {
  os.write(kMagic, 4);
  write_u32(os, static_cast<std::uint32_t>(dtype_of<Real>()));
  write_u32(os, static_cast<std::uint32_t>(a.rank()));
  for (auto d : a.shape()) write_u64(os, d);
  os.write(reinterpret_cast<const char*>(a.data().data()), static_cast<std::streamsize>(a.size() * sizeof(Real)));
  if (!os) throw IoError("failed writing tensor");
}

template <typename Real>
NdArray<Real> read_tensor(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4)) throw FormatError("truncated tensor header");
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad tensor magic");
  const auto dtype = read_u32(is);
  const auto rank = read_u32(is);
  if (rank > 16) throw FormatError("implausible tensor rank " + std::to_string(rank));
  Shape shape(rank);
  for (auto& d : shape) d = read_u64(is);
  const std::size_t n = shape_size(shape);
  switch (static_cast<DType>(dtype)) {
    case DType::float32:
      return NdArray<Real>(std::move(shape), read_payload<float, Real>(is, n));
    case DType::float64:
      return NdArray<Real>(std::move(shape), read_payload<double, Real>(is, n));
  }
  throw FormatError("unknown tensor dtype code " + std::to_string(dtype));
}

template <typename Real>
void save_tensor(const std::filesystem::path& path, const NdArray<Real>& a) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(os, a);
}

template <typename Real>
NdArray<Real> load_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  return read_tensor<Real>(is);
}

template class NdArray<float>;
template class NdArray<double>;
template void require_same_shape(const NdArray<float>&, const NdArray<float>&, const char*);
template void require_same_shape(const NdArray<double>&, const NdArray<double>&, const char*);
template void write_tensor(std::ostream&, const NdArray<float>&);
template void write_tensor(std::ostream&, const NdArray<double>&);
template NdArray<float> read_tensor(std::istream&);
template NdArray<double> read_tensor(std::istream&);
template void save_tensor(const std::filesystem::path&, const NdArray<float>&);
template void save_tensor(const std::filesystem::path&, const NdArray<double>&);
template NdArray<float> load_tensor(const std::filesystem::path&);
template NdArray<double> load_tensor(const std::filesystem::path&);

}  // namespace difflab
