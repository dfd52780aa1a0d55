// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "difflab/checkpoint.hpp"
#include "difflab/errors.hpp"
#include "difflab/training.hpp"

using namespace difflab;

namespace {

std::filesystem::path tmp(const char* name) { return std::filesystem::temp_directory_path() / name; }

Checkpoint sample_checkpoint(Precision p) {
  MlpArchitecture arch;
  arch.hidden = {8};
  arch.embed_dim = 4;
  const auto m = init_mlp<double>(arch, 3);
  Checkpoint c;
  c.architecture = arch;
  c.schedule.kind = ScheduleKind::cosine;
  c.schedule.steps = 77;
  c.mode = TrainMode::ip;
  c.gamma = 0.1;
  c.step = 42;
  c.precision = p;
  c.params = m.parameter_values();
  c.ema = init_mlp<double>(arch, 4).parameter_values();
  c.metadata_json = R"({"note":"x"})";
  return c;
}

}  // namespace

TEST_CASE("checkpoints round-trip every field") {
  const auto path = tmp("difflab_ckpt_roundtrip.ddck");
  const auto c = sample_checkpoint(Precision::float64);
  save_checkpoint(path, c);
  const auto r = load_checkpoint(path);
  CHECK(r.architecture == c.architecture);
  CHECK(r.schedule == c.schedule);
  CHECK(r.mode == c.mode);
  CHECK(r.gamma == c.gamma);
  CHECK(r.step == 42);
  CHECK(r.precision == Precision::float64);
  CHECK(r.params == c.params);
  CHECK(r.ema == c.ema);
  CHECK(r.metadata_json == c.metadata_json);
  CHECK(r.model<double>(true).parameter_values() == c.ema);
  CHECK(r.model<double>(false).parameter_values() == c.params);
  std::filesystem::remove(path);
}

TEST_CASE("float32 checkpoints store single precision and identical saves are byte-identical") {
  const auto a = tmp("difflab_ckpt_a.ddck"), b = tmp("difflab_ckpt_b.ddck");
  const auto c = sample_checkpoint(Precision::float32);
  save_checkpoint(a, c);
  save_checkpoint(b, c);
  CHECK(file_digest(a) == file_digest(b));
  const auto r = load_checkpoint(a);
  for (std::size_t i = 0; i < c.params.size(); ++i)
    for (std::size_t k = 0; k < c.params[i].size(); ++k)
      CHECK(r.params[i][k] == static_cast<double>(static_cast<float>(c.params[i][k])));
  CHECK(parameter_digest(r) == parameter_digest(c));
  auto other = c;
  other.mode = TrainMode::standard;
  other.metadata_json = "{}";
  CHECK(parameter_digest(other) == parameter_digest(c));
  other.params[0][0] += 1.0;
  CHECK(parameter_digest(other) != parameter_digest(c));
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("corrupt or missing checkpoints are rejected") {
  CHECK_THROWS_AS(load_checkpoint(tmp("difflab_no_such.ddck")), IoError);
  const auto path = tmp("difflab_ckpt_bad.ddck");
  {
    std::ofstream(path) << "not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  save_checkpoint(path, sample_checkpoint(Precision::float32));
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(load_checkpoint(path), FormatError);
  auto c = sample_checkpoint(Precision::float32);
  c.metadata_json = "{broken";
  CHECK_THROWS_AS(save_checkpoint(path, c), InvalidArgument);
  std::filesystem::remove(path);
}
