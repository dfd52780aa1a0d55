// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <sstream>
#include <string>

#include "difflab/cli.hpp"
#include "difflab/config.hpp"
#include "difflab/errors.hpp"

using namespace difflab;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("difflab_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A config small enough to train in well under a second.
fs::path tiny_config(const fs::path& dir, const std::string& mode = "standard", double gamma = 0.0) {
  const auto path = dir / ("tiny_" + mode + ".json");
  nlohmann::ordered_json j = {
      {"seed", 4},
      {"dataset", {{"kind", "gaussian_mixture"}, {"n", 256}, {"modes", 4}}},
      {"schedule", {{"kind", "linear"}, {"steps", 40}}},
      {"model", {{"hidden", {16, 16}}, {"embed_dim", 8}}},
      {"train",
       {{"mode", mode},
        {"gamma", gamma},
        {"batch_size", 32},
        {"total_iters", 30},
        {"checkpoint_every", 15},
        {"log_every", 10}}},
      {"sample", {{"kind", "ancestral"}, {"n", 64}}},
      {"evaluation", {{"metric_samples", 128}, {"bias_chains", 16}, {"bias_iterations", 64}}}};
  std::ofstream(path) << j.dump(2);
  return path;
}

std::string weights_digest(const std::string& train_stdout) {
  const auto pos = train_stdout.find("weights ");
  REQUIRE(pos != std::string::npos);
  return train_stdout.substr(pos + 8, 16);
}

std::string train_tiny(const fs::path& dir, const std::string& name, const std::string& mode = "standard",
                       double gamma = 0.0) {
  const auto r = cli({"train", "--config", tiny_config(dir, mode, gamma).string(), "--out", (dir / name).string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  return r.out;
}

}  // namespace

TEST_CASE("gamma grids count floor((stop - start) / step) + 1 values") {
  CHECK(parse_gamma_grid("0:0:1").values() == std::vector<double>{0.0});
  CHECK(parse_gamma_grid("0:0.2:0.025").values().size() == 9);
  CHECK(parse_gamma_grid("0.05:0.2:0.1").values().size() == 2);
  CHECK_THROWS_AS(parse_gamma_grid("0:0.2"), InvalidArgument);
  CHECK_THROWS_AS(parse_gamma_grid("a:b:c"), InvalidArgument);
  CHECK_THROWS_AS(parse_gamma_grid("0:1:0"), InvalidArgument);
  CHECK_THROWS_AS(parse_gamma_grid("1:0:0.1"), InvalidArgument);
}

TEST_CASE("usage and configuration errors map to exit codes") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"train"}).code == 2);
  const auto r = cli({"train", "--config", "/nonexistent/difflab.json"});
  CHECK(r.code == 1);
  CHECK(r.err.find("cannot open") != std::string::npos);
  CHECK(cli({"--version"}).code == 0);
}

TEST_CASE("train writes checkpoints, a config copy and a manifest") {
  const auto dir = scratch("train");
  train_tiny(dir, "run");
  for (const char* f : {"ckpt_00000000.ddck", "ckpt_00000015.ddck", "ckpt_00000030.ddck", "config.json",
                        "manifest.json", "train_log.csv"})
    CHECK_MESSAGE(fs::exists(dir / "run" / f), f);
  const auto m = nlohmann::json::parse(slurp(dir / "run" / "manifest.json"));
  CHECK(m.at("command") == "train");
  CHECK(m.at("master_seed") == 4);
  CHECK(m.at("outputs").contains("ckpt_00000030.ddck"));
  fs::remove_all(dir);
}

TEST_CASE("input perturbation with gamma 0 trains the same weights as standard") {
  const auto dir = scratch("ip0");
  CHECK(weights_digest(train_tiny(dir, "std")) == weights_digest(train_tiny(dir, "ip", "ip", 0.0)));
  CHECK(weights_digest(train_tiny(dir, "std")) != weights_digest(train_tiny(dir, "ipg", "ip", 0.1)));
  fs::remove_all(dir);
}

TEST_CASE("sampling is reproducible and honours respacing") {
  const auto dir = scratch("sample");
  train_tiny(dir, "run");
  const auto ckpt = (dir / "run" / "ckpt_00000030.ddck").string();
  auto sample = [&](const std::string& name, std::vector<std::string> extra) {
    std::vector<std::string> args{"sample", "--checkpoint", ckpt, "--out", (dir / name).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    const auto r = cli(args);
    REQUIRE_MESSAGE(r.code == 0, r.err);
    return r.out;
  };
  sample("a", {});
  sample("b", {});
  CHECK(slurp(dir / "a" / "samples.tensor") == slurp(dir / "b" / "samples.tensor"));
  CHECK(slurp(dir / "a" / "samples.csv") == slurp(dir / "b" / "samples.csv"));

  const auto full = sample("full", {"--steps", "40"});
  CHECK(full.find("steps_executed=40") != std::string::npos);
  CHECK(slurp(dir / "full" / "samples.tensor") == slurp(dir / "a" / "samples.tensor"));

  const auto ddim = sample("ddim", {"--kind", "ddim", "--eta", "0", "--steps", "10"});
  CHECK(ddim.find("steps_executed=10") != std::string::npos);
  sample("ddim2", {"--kind", "ddim", "--eta", "0", "--steps", "10"});
  CHECK(slurp(dir / "ddim" / "samples.tensor") == slurp(dir / "ddim2" / "samples.tensor"));

  sample("seeded", {"--seed", "99"});
  CHECK(slurp(dir / "seeded" / "samples.tensor") != slurp(dir / "a" / "samples.tensor"));

  const auto bad = cli({"sample", "--checkpoint", ckpt, "--out", (dir / "bad").string(), "--steps", "41"});
  CHECK(bad.code == 1);
  fs::remove_all(dir);
}

TEST_CASE("replay reproduces train and sample outputs") {
  const auto dir = scratch("replay");
  train_tiny(dir, "run");
  auto r = cli({"replay", "--manifest", (dir / "run" / "manifest.json").string(), "--out", (dir / "again").string()});
  CHECK_MESSAGE(r.code == 0, std::string(r.out + r.err));
  CHECK(r.out.find("MATCH ckpt_00000030.ddck") != std::string::npos);
  CHECK(r.out.find("DIFF") == std::string::npos);

  const auto ckpt = (dir / "run" / "ckpt_00000030.ddck").string();
  REQUIRE(cli({"sample", "--checkpoint", ckpt, "--out", (dir / "s").string(), "--kind", "ddim", "--eta", "0.5",
               "--steps", "8"})
              .code == 0);
  r = cli({"replay", "--manifest", (dir / "s" / "manifest.json").string(), "--out", (dir / "s2").string()});
  CHECK_MESSAGE(r.code == 0, std::string(r.out + r.err));
  CHECK(r.out.find("MATCH samples.tensor") != std::string::npos);

  // A tampered manifest must be reported as a mismatch.
  auto m = nlohmann::json::parse(slurp(dir / "s" / "manifest.json"));
  m["outputs"]["samples.tensor"] = "0000000000000000";
  std::ofstream(dir / "s" / "manifest.json") << m.dump();
  r = cli({"replay", "--manifest", (dir / "s" / "manifest.json").string(), "--out", (dir / "s3").string()});
  CHECK(r.code == 3);
  CHECK(r.out.find("DIFF  samples.tensor") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("analysis commands write their tables") {
  const auto dir = scratch("analysis");
  train_tiny(dir, "run");
  const auto ckpt = (dir / "run" / "ckpt_00000030.ddck").string();

  auto r = cli({"bias", "--checkpoint", ckpt, "--out", (dir / "bias").string(), "--t-grid", "10,20,30,40", "--n",
                "64"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(dir / "bias" / "bias.csv"));
  CHECK(r.out.find("spearman") != std::string::npos);

  r = cli({"bias", "--checkpoint", ckpt, "--out", (dir / "stoch").string(), "--mode", "stoch", "--t-grid", "10,20",
           "--n", "8"});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  r = cli({"errstats", "--checkpoint", ckpt, "--out", (dir / "err").string(), "--stride", "10", "--n", "100"});
  REQUIRE_MESSAGE(r.code == 0, r.err);

  REQUIRE(cli({"sample", "--checkpoint", ckpt, "--out", (dir / "s").string(), "--n", "128"}).code == 0);
  r = cli({"metrics", "--real", ckpt, "--generated", (dir / "s" / "samples.csv").string(), "--out",
           (dir / "m").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto table = slurp(dir / "m" / "metrics.csv");
  for (const char* name : {"energy_distance", "frechet_distance", "precision_k", "recall_k"})
    CHECK_MESSAGE(table.find(name) != std::string::npos, name);
  fs::remove_all(dir);
}

TEST_CASE("grid-gamma with a single-point range trains one arm") {
  const auto dir = scratch("grid");
  const auto r = cli({"grid-gamma", "--config", tiny_config(dir).string(), "--out", (dir / "g").string(), "--range",
                      "0:0:1", "--seeds", "1"});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream csv(slurp(dir / "g" / "grid_gamma.csv"));
  std::string line;
  std::size_t rows = 0;
  std::getline(csv, line);
  CHECK(line == "gamma,seeds,energy_distance,frechet_distance,precision,recall,final_loss");
  while (std::getline(csv, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 1);
  fs::remove_all(dir);
}

TEST_CASE("the shipped golden config is valid") {
  const auto cfg = load_config(fs::path(DIFFLAB_SOURCE_DIR) / "configs" / "golden_2d.json");
  CHECK(cfg.dataset.kind == DatasetKind::gaussian_mixture);
  CHECK(cfg.train.total_iters >= 2000);
  CHECK(cfg.schedule.steps == 1000);
}
