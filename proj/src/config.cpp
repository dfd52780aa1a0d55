// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>

#include "difflab/errors.hpp"
#include "difflab/rng.hpp"

namespace difflab {

using Json = nlohmann::ordered_json;

namespace {

// Reads keys of one JSON object, remembering which were used so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + path_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InvalidArgument("config: '" + where(key) + "' has the wrong type");
    }
  }

  template <typename E, typename Parse>
  void read_enum(const char* key, E& out, Parse parse) {
    std::string s;
    bool present = j_.contains(key);
    read(key, s);
    if (!present) return;
    try {
      out = parse(s);
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("config: '" + where(key) + "': " + e.what());
    }
  }

  Section child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    static const Json empty = Json::object();
    return Section(it == j_.end() ? empty : *it, where(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw InvalidArgument("config: unknown key '" + where(k) + "'");
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

Activation parse_activation(const std::string& s) {
  if (s == "silu") return Activation::silu;
  if (s == "relu") return Activation::relu;
  throw InvalidArgument("unknown activation '" + s + "'");
}

}  // namespace

MlpArchitecture ModelSpec::architecture(std::size_t data_dim) const {
  MlpArchitecture a;
  a.data_dim = data_dim;
  a.hidden = hidden;
  a.embed_dim = embed_dim;
  a.max_period = max_period;
  a.activation = activation;
  return a;
}

void ExperimentConfig::derive_seeds() {
  train.seed = derive_seed(seed, "train");
  train.jacobian.probe_seed = derive_seed(seed, "probes");
  sample.sampler.seed = derive_seed(seed, "sample");
}

std::uint64_t ExperimentConfig::data_seed() const { return derive_seed(seed, "data"); }

ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  Section root(j, "");
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);

  {
    Section s = root.child("dataset");
    auto& d = c.dataset;
    s.read_enum("kind", d.kind, parse_dataset_kind);
    s.read("n", d.n);
    s.read("mean", d.mean);
    s.read("stddev", d.stddev);
    s.read("modes", d.modes);
    s.read("radius", d.radius);
    s.read("mode_stddev", d.mode_stddev);
    s.read("weights", d.weights);
    s.read("noise", d.noise);
    s.read("path", d.path);
    s.finish();
  }
  {
    Section s = root.child("schedule");
    auto& d = c.schedule;
    s.read_enum("kind", d.kind, parse_schedule_kind);
    s.read("steps", d.steps);
    s.read("beta_start", d.beta_start);
    s.read("beta_end", d.beta_end);
    s.read("cosine_offset", d.cosine_offset);
    s.read("beta_clip", d.beta_clip);
    s.finish();
  }
  {
    Section s = root.child("model");
    auto& d = c.model;
    s.read("hidden", d.hidden);
    s.read("embed_dim", d.embed_dim);
    s.read("max_period", d.max_period);
    s.read_enum("activation", d.activation, parse_activation);
    s.finish();
  }
  {
    Section s = root.child("train");
    auto& d = c.train;
    s.read_enum("mode", d.mode, parse_train_mode);
    s.read("gamma", d.gamma);
    s.read("lambda_gp", d.lambda_gp);
    s.read("lambda_wd", d.lambda_wd);
    s.read("lr", d.adam.lr);
    s.read("beta1", d.adam.beta1);
    s.read("beta2", d.adam.beta2);
    s.read("adam_eps", d.adam.eps);
    s.read("weight_decay", d.adam.weight_decay);
    s.read("ema_rate", d.ema_rate);
    s.read("batch_size", d.batch_size);
    s.read("total_iters", d.total_iters);
    s.read("checkpoint_every", d.checkpoint_every);
    s.read("log_every", d.log_every);
    s.read("eval_every", d.eval_every);
    s.read_enum("precision", d.precision, parse_precision);
    s.read("jacobian_budget", d.jacobian.exact_budget);
    s.read("hutchinson_probes", d.jacobian.hutchinson_probes);
    s.finish();
  }
  {
    Section s = root.child("sample");
    auto& d = c.sample;
    s.read_enum("kind", d.sampler.kind, parse_sampler_kind);
    s.read("eta", d.sampler.eta);
    s.read_enum("variance", d.sampler.variance, parse_variance_choice);
    s.read("steps", d.sampler.steps);
    s.read("record_trajectory", d.sampler.record_trajectory);
    s.read("n", d.n);
    s.read("use_ema", d.use_ema);
    s.finish();
  }
  {
    Section s = root.child("evaluation");
    auto& d = c.evaluation;
    s.read("bias_t_grid", d.bias_t_grid);
    s.read("bias_iterations", d.bias_iterations);
    s.read("bias_chains", d.bias_chains);
    s.read("errstats_stride", d.errstats_stride);
    s.read("errstats_samples", d.errstats_samples);
    s.read("errstats_lead_steps", d.errstats_lead_steps);
    s.read_enum("normality_test", d.normality_test, parse_normality_test);
    s.read("lipschitz_t", d.lipschitz_t);
    s.read("lipschitz_pairs", d.lipschitz_pairs);
    s.read("lipschitz_radius", d.lipschitz_radius);
    s.read("metric_samples", d.metric_samples);
    s.read("knn_k", d.knn_k);
    s.finish();
  }
  root.finish();

  c.train.validate();
  c.sample.sampler.validate();
  if (c.schedule.steps < 1) throw InvalidArgument("config: 'schedule.steps' must be >= 1");
  if (c.sample.sampler.steps > c.schedule.steps)
    throw InvalidArgument("config: 'sample.steps' exceeds 'schedule.steps'");
  c.derive_seeds();
  return c;
}

Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  const auto& ds = c.dataset;
  j["dataset"] = {{"kind", to_string(ds.kind)}, {"n", ds.n},           {"mean", ds.mean},
                  {"stddev", ds.stddev},        {"modes", ds.modes},   {"radius", ds.radius},
                  {"mode_stddev", ds.mode_stddev}, {"weights", ds.weights}, {"noise", ds.noise},
                  {"path", ds.path}};
  const auto& sc = c.schedule;
  j["schedule"] = {{"kind", to_string(sc.kind)},       {"steps", sc.steps},
                   {"beta_start", sc.beta_start},      {"beta_end", sc.beta_end},
                   {"cosine_offset", sc.cosine_offset}, {"beta_clip", sc.beta_clip}};
  j["model"] = {{"hidden", c.model.hidden},
                {"embed_dim", c.model.embed_dim},
                {"max_period", c.model.max_period},
                {"activation", c.model.activation == Activation::silu ? "silu" : "relu"}};
  const auto& t = c.train;
  j["train"] = {{"mode", to_string(t.mode)},
                {"gamma", t.gamma},
                {"lambda_gp", t.lambda_gp},
                {"lambda_wd", t.lambda_wd},
                {"lr", t.adam.lr},
                {"beta1", t.adam.beta1},
                {"beta2", t.adam.beta2},
                {"adam_eps", t.adam.eps},
                {"weight_decay", t.adam.weight_decay},
                {"ema_rate", t.ema_rate},
                {"batch_size", t.batch_size},
                {"total_iters", t.total_iters},
                {"checkpoint_every", t.checkpoint_every},
                {"log_every", t.log_every},
                {"eval_every", t.eval_every},
                {"precision", to_string(t.precision)},
                {"jacobian_budget", t.jacobian.exact_budget},
                {"hutchinson_probes", t.jacobian.hutchinson_probes}};
  const auto& s = c.sample;
  j["sample"] = {{"kind", to_string(s.sampler.kind)},
                 {"eta", s.sampler.eta},
                 {"variance", to_string(s.sampler.variance)},
                 {"steps", s.sampler.steps},
                 {"record_trajectory", s.sampler.record_trajectory},
                 {"n", s.n},
                 {"use_ema", s.use_ema}};
  const auto& e = c.evaluation;
  j["evaluation"] = {{"bias_t_grid", e.bias_t_grid},
                     {"bias_iterations", e.bias_iterations},
                     {"bias_chains", e.bias_chains},
                     {"errstats_stride", e.errstats_stride},
                     {"errstats_samples", e.errstats_samples},
                     {"errstats_lead_steps", e.errstats_lead_steps},
                     {"normality_test", to_string(e.normality_test)},
                     {"lipschitz_t", e.lipschitz_t},
                     {"lipschitz_pairs", e.lipschitz_pairs},
                     {"lipschitz_radius", e.lipschitz_radius},
                     {"metric_samples", e.metric_samples},
                     {"knn_k", e.knn_k}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& c) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << config_to_json(c).dump(2) << '\n';
}

std::string config_hash(const ExperimentConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config_to_json(c).dump())));
  return buf;
}

std::optional<int> apply_env_overrides(ExperimentConfig& c) {
  if (const char* dir = std::getenv("DIFFLAB_OUTPUT_DIR"); dir && *dir) c.output_dir = dir;
  if (const char* threads = std::getenv("DIFFLAB_THREADS"); threads && *threads) {
    try {
      const int n = std::stoi(threads);
      if (n >= 1) return n;
    } catch (const std::exception&) {
    }
    throw InvalidArgument(std::string("DIFFLAB_THREADS must be a positive integer, got '") + threads + "'");
  }
  return std::nullopt;
}

}  // namespace difflab
