// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include "difflab/errors.hpp"
#include "difflab/ndarray.hpp"
#include "difflab/rng.hpp"

using namespace difflab;

TEST_CASE("splitmix64 and fnv1a64 match their published reference outputs") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("derived seeds are stable and separate tags and indices") {
  CHECK(derive_seed(7, "train", 3) == derive_seed(7, "train", 3));
  std::set<std::uint64_t> seen;
  for (const char* tag : {"train", "probes", "sample", "data"})
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(7, tag, i));
  CHECK(seen.size() == 400);
  CHECK(derive_seed(7, "train") != derive_seed(8, "train"));
}

TEST_CASE("Rng streams replay exactly from the seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) CHECK(a.normal() == b.normal());
  std::vector<float> fa(16), fb(16);
  a.fill_normal<float>(fa);
  b.fill_normal<float>(fb);
  CHECK(fa == fb);
}

TEST_CASE("NdArray shape bookkeeping") {
  NdArray<double> a(Shape{3, 4}, 1.5);
  CHECK(a.rows() == 3);
  CHECK(a.cols() == 4);
  CHECK(a.size() == 12);
  a.at(2, 1) = 9.0;
  CHECK(a.row(2)[1] == 9.0);
  const auto r = a.reshaped(Shape{4, 3});
  CHECK(r.shape() == Shape{4, 3});
  CHECK_THROWS_AS(a.reshaped(Shape{5, 3}), ShapeError);
  const auto s = a.slice_rows(1, 3);
  CHECK(s.rows() == 2);
  CHECK(s.at(1, 1) == 9.0);
  CHECK_THROWS_AS(NdArray<double>(Shape{2, 2}, std::vector<double>{1, 2, 3}), ShapeError);
  CHECK(NdArray<double>::scalar(2.5).item() == 2.5);
  CHECK_THROWS(a.item());
}

TEST_CASE("all_finite flags NaN and infinity") {
  NdArray<float> a(Shape{2}, 0.0f);
  CHECK(a.all_finite());
  a[1] = std::numeric_limits<float>::infinity();
  CHECK_FALSE(a.all_finite());
}

TEST_CASE("tensor blobs round-trip and reject corruption") {
  NdArray<float> a(Shape{2, 3}, std::vector<float>{1, -2, 3.25f, 4, 5, 6e-8f});
  std::stringstream ss;
  write_tensor(ss, a);
  CHECK(read_tensor<float>(ss) == a);

  std::stringstream widened;
  write_tensor(widened, a);
  const auto d = read_tensor<double>(widened);
  CHECK(d.shape() == a.shape());
  CHECK(d[2] == 3.25);

  std::string bytes;
  {
    std::stringstream s2;
    write_tensor(s2, a);
    bytes = s2.str();
  }
  std::stringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(read_tensor<float>(truncated), FormatError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::stringstream badmagic(bad);
  CHECK_THROWS_AS(read_tensor<float>(badmagic), FormatError);

  const auto path = std::filesystem::temp_directory_path() / "difflab_tensor_roundtrip.tensor";
  save_tensor(path, a);
  CHECK(load_tensor<float>(path) == a);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_tensor<float>(path), IoError);
}
