// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "difflab/checkpoint.hpp"
#include "difflab/config.hpp"
#include "difflab/data.hpp"
#include "difflab/errors.hpp"
#include "difflab/evaluation.hpp"
#include "difflab/kernels.hpp"
#include "difflab/metrics.hpp"
#include "difflab/normality.hpp"
#include "difflab/rng.hpp"
#include "difflab/sampling.hpp"
#include "difflab/training.hpp"

namespace difflab {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::vector<double> GammaGrid::values() const {
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> v(count);
  for (std::size_t k = 0; k < count; ++k) v[k] = start + static_cast<double>(k) * step;
  return v;
}

GammaGrid parse_gamma_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("malformed grid spec '" + spec + "' (expected start:stop:step)");
    }
  }
  if (parts.size() != 3) throw InvalidArgument("malformed grid spec '" + spec + "' (expected start:stop:step)");
  GammaGrid g{parts[0], parts[1], parts[2]};
  if (g.start < 0.0 || g.stop < g.start) throw InvalidArgument("grid spec needs 0 <= start <= stop");
  if (!(g.step > 0.0)) throw InvalidArgument("grid spec needs a positive step");
  return g;
}

namespace {

using Clock = std::chrono::steady_clock;

// Records what a command did so it can be replayed.
struct RunRecord {
  std::string command;
  std::vector<std::string> args;
  fs::path out_dir;
  std::uint64_t seed = 0;
  std::string config_hash;
  Clock::time_point start = Clock::now();
  std::vector<std::string> outputs;  // file names relative to out_dir

  void write() const {
    Json m;
    m["command"] = command;
    m["args"] = args;
    m["config_hash"] = config_hash;
    m["code_version"] = kVersion;
    m["master_seed"] = seed;
    m["wall_ms"] = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    Json files = Json::object();
    for (const auto& f : outputs) files[f] = file_digest(out_dir / f);
    m["outputs"] = files;
    std::ofstream o(out_dir / "manifest.json");
    if (!o) throw IoError("cannot write " + (out_dir / "manifest.json").string());
    o << m.dump(2) << '\n';
  }
};

template <typename F>
auto with_precision(Precision p, F&& f) {
  if (p == Precision::float32) return f(float{});
  return f(double{});
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument("malformed integer list '" + s + "'");
    }
  }
  if (out.empty()) throw InvalidArgument("empty integer list");
  return out;
}

// The experiment config stored in a checkpoint by `train`.
ExperimentConfig embedded_config(const Checkpoint& ckpt) {
  const auto meta = Json::parse(ckpt.metadata_json);
  if (!meta.contains("config")) throw FormatError("checkpoint carries no experiment config");
  return config_from_json(meta.at("config"));
}

Dataset embedded_dataset(const Checkpoint& ckpt) {
  const auto cfg = embedded_config(ckpt);
  return load_dataset(cfg.dataset, cfg.data_seed());
}

// A checkpoint stands for its training data, subsampled to the configured metric size.
NdArray<double> load_points(const fs::path& path) {
  if (path.extension() == ".csv") return read_points_csv(path);
  if (path.extension() == ".ddck") {
    const Checkpoint ckpt = load_checkpoint(path);
    const auto cfg = embedded_config(ckpt);
    const Dataset data = load_dataset(cfg.dataset, cfg.data_seed());
    return sample_rows(data.samples, std::min(cfg.evaluation.metric_samples, data.size()),
                       derive_seed(cfg.seed, "eval-reference"));
  }
  auto a = load_tensor<double>(path);
  if (a.rank() == 1) a = a.reshaped(Shape{a.size(), 1});
  return a;
}

void set_threads(int threads) {
  if (threads > 0) kernels::set_num_threads(threads);
}

std::vector<std::string> strip_out(const std::vector<std::string>& args) {
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--out") {
      ++i;
      continue;
    }
    if (args[i].rfind("--out=", 0) == 0) continue;
    kept.push_back(args[i]);
  }
  return kept;
}

// ---- train -------------------------------------------------------------

struct TrainArgs {
  std::string config;
  std::string out;
  int threads = 0;
};

int cmd_train(const TrainArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  RunRecord rec;
  rec.command = "train";
  rec.args = raw;
  ExperimentConfig cfg = load_config(a.config);
  if (auto env_threads = apply_env_overrides(cfg)) set_threads(*env_threads);
  set_threads(a.threads);
  // Checkpoints embed the config as loaded, so a run reproduces byte for
  // byte whatever directory it is written to.
  const Json embedded = config_to_json(cfg);
  rec.config_hash = config_hash(cfg);
  if (!a.out.empty()) cfg.output_dir = a.out;
  rec.out_dir = cfg.output_dir;
  rec.seed = cfg.seed;
  fs::create_directories(rec.out_dir);

  const Dataset data = load_dataset(cfg.dataset, cfg.data_seed());
  Json meta;
  meta["config"] = embedded;
  meta["image_rows"] = data.image_rows;
  meta["image_cols"] = data.image_cols;
  TrainOutputs outputs{rec.out_dir, meta.dump()};
  const auto arch = cfg.model.architecture(data.dim());

  double final_loss = with_precision(cfg.train.precision, [&](auto tag) {
    using Real = decltype(tag);
    EvalHook<Real> hook;
    const NdArray<double> reference = sample_rows(data.samples, std::min<std::size_t>(500, data.size()),
                                                  derive_seed(cfg.seed, "eval-reference"));
    hook.columns = {"eval_energy"};
    hook.evaluate = [&](const MlpDenoiser<Real>& ema, std::int64_t) {
      SamplerConfig s;
      s.kind = SamplerKind::ddim;
      s.steps = std::min(50, cfg.schedule.steps);
      s.seed = derive_seed(cfg.seed, "eval-samples");
      const auto gen = sample<Real>(ema, reference.rows(), data.dim(), make_schedule(cfg.schedule), s);
      return std::vector<double>{energy_distance(gen.final.template cast<double>(), reference)};
    };
    const auto state = train<Real>(data, cfg.train, cfg.schedule, arch, outputs,
                                   cfg.train.eval_every > 0 ? &hook : nullptr);
    return state.history.size() ? state.history.back() : 0.0;
  });

  std::ofstream(rec.out_dir / "config.json") << embedded.dump(2) << '\n';
  rec.outputs.push_back("config.json");
  for (const auto& entry : fs::directory_iterator(rec.out_dir))
    if (entry.path().extension() == ".ddck") rec.outputs.push_back(entry.path().filename().string());
  std::sort(rec.outputs.begin(), rec.outputs.end());
  rec.write();
  const fs::path last = checkpoint_path(rec.out_dir, cfg.train.total_iters);
  out << "trained " << cfg.train.total_iters << " iterations (" << to_string(cfg.train.mode) << "), final loss "
      << final_loss << "\ncheckpoint " << last.string() << " weights " << parameter_digest(load_checkpoint(last))
      << '\n';
  return 0;
}

// ---- sample ------------------------------------------------------------

struct SampleArgs {
  std::string checkpoint, out;
  int steps = -1;
  std::string kind, variance;
  double eta = -1.0;
  std::size_t n = 0;
  std::int64_t seed = -1;
  bool raw = false;
  int threads = 0;
};

int cmd_sample(const SampleArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  set_threads(a.threads);
  RunRecord rec;
  rec.command = "sample";
  rec.args = raw;
  rec.out_dir = a.out;
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const ExperimentConfig cfg = embedded_config(ckpt);
  const auto meta = Json::parse(ckpt.metadata_json);
  rec.config_hash = config_hash(cfg);

  SamplerConfig s = cfg.sample.sampler;
  std::size_t n = cfg.sample.n;
  if (a.steps >= 0) s.steps = a.steps;
  if (!a.kind.empty()) s.kind = parse_sampler_kind(a.kind);
  if (!a.variance.empty()) s.variance = parse_variance_choice(a.variance);
  if (a.eta >= 0.0) s.eta = a.eta;
  if (a.n > 0) n = a.n;
  rec.seed = cfg.seed;
  if (a.seed >= 0) {
    rec.seed = static_cast<std::uint64_t>(a.seed);
    s.seed = derive_seed(rec.seed, "sample");
  }
  const NoiseSchedule schedule = make_schedule(ckpt.schedule);
  if (s.steps == schedule.steps()) s.steps = 0;  // the full chain runs unrespaced
  fs::create_directories(rec.out_dir);

  int executed = 0;
  const NdArray<double> samples = with_precision(ckpt.precision, [&](auto tag) {
    using Real = decltype(tag);
    const auto model = ckpt.model<Real>(!a.raw);
    auto result = sample<Real>(model, n, ckpt.architecture.data_dim, schedule, s);
    executed = result.steps_executed;
    return result.final.template cast<double>();
  });

  save_tensor(rec.out_dir / "samples.tensor", samples);
  rec.outputs.push_back("samples.tensor");
  if (samples.cols() == 2) {
    write_points_csv(rec.out_dir / "samples.csv", samples);
    rec.outputs.push_back("samples.csv");
  }
  const std::size_t rows = meta.value("image_rows", std::size_t{0}), cols = meta.value("image_cols", std::size_t{0});
  if (rows > 0 && cols > 0 && rows * cols == samples.cols()) {
    write_pgm_grid(rec.out_dir / "samples.pgm", samples, rows, cols);
    rec.outputs.push_back("samples.pgm");
  }
  rec.write();
  out << "sampled " << n << " points with " << to_string(s.kind) << ", steps_executed=" << executed << '\n';
  return 0;
}

// ---- bias --------------------------------------------------------------

struct BiasArgs {
  std::string checkpoint, out, mode = "det", t_grid;
  std::size_t n = 0, buckets = 0;
  std::int64_t seed = -1;
  int threads = 0;
};

int cmd_bias(const BiasArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  set_threads(a.threads);
  RunRecord rec;
  rec.command = "bias";
  rec.args = raw;
  rec.out_dir = a.out;
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const ExperimentConfig cfg = embedded_config(ckpt);
  rec.config_hash = config_hash(cfg);
  rec.seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : cfg.seed;
  const Dataset data = embedded_dataset(ckpt);
  const NoiseSchedule schedule = make_schedule(ckpt.schedule);
  const std::vector<int> grid = a.t_grid.empty() ? cfg.evaluation.bias_t_grid : parse_int_list(a.t_grid);
  fs::create_directories(rec.out_dir);

  const BiasTable table = with_precision(ckpt.precision, [&](auto tag) {
    using Real = decltype(tag);
    const auto model = ckpt.model<Real>();
    if (a.mode == "det") {
      DeterministicBiasOptions o;
      o.iterations = a.n > 0 ? a.n : cfg.evaluation.bias_iterations;
      o.t_grid = grid;
      o.buckets = a.buckets;
      o.seed = derive_seed(rec.seed, "bias");
      return exposure_bias_deterministic<Real>(model, data.samples, schedule, o);
    }
    if (a.mode == "stoch") {
      StochasticBiasOptions o;
      o.t_list = grid;
      o.n_chains = a.n > 0 ? a.n : cfg.evaluation.bias_chains;
      o.sampler.kind = SamplerKind::ancestral;
      o.seed = derive_seed(rec.seed, "bias");
      return exposure_bias_stochastic<Real>(model, data.samples, schedule, o);
    }
    throw InvalidArgument("--mode must be det or stoch");
  });
  table.write_csv(rec.out_dir / "bias.csv");
  rec.outputs.push_back("bias.csv");
  rec.write();
  const auto ts = table.steps(), vs = table.values();
  out << "bias table (" << table.mode << ", " << table.values().size() << " steps)";
  if (ts.size() >= 2) out << ", spearman(t, value) = " << spearman(ts, vs);
  out << '\n';
  return 0;
}

// ---- errstats ----------------------------------------------------------

struct ErrArgs {
  std::string checkpoint, out, test;
  int stride = 0, lead_steps = -1;
  std::size_t n = 0;
  std::int64_t seed = -1;
  int threads = 0;
};

int cmd_errstats(const ErrArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  set_threads(a.threads);
  RunRecord rec;
  rec.command = "errstats";
  rec.args = raw;
  rec.out_dir = a.out;
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const ExperimentConfig cfg = embedded_config(ckpt);
  rec.config_hash = config_hash(cfg);
  rec.seed = a.seed >= 0 ? static_cast<std::uint64_t>(a.seed) : cfg.seed;
  const Dataset data = embedded_dataset(ckpt);
  const NoiseSchedule schedule = make_schedule(ckpt.schedule);
  fs::create_directories(rec.out_dir);

  ErrorStatsOptions o;
  o.t_stride = a.stride > 0 ? a.stride : cfg.evaluation.errstats_stride;
  o.n_samples = a.n > 0 ? a.n : cfg.evaluation.errstats_samples;
  o.lead_steps = a.lead_steps >= 0 ? a.lead_steps : cfg.evaluation.errstats_lead_steps;
  o.test = a.test.empty() ? cfg.evaluation.normality_test : parse_normality_test(a.test);
  o.seed = derive_seed(rec.seed, "errstats");
  const ErrorStats stats = with_precision(ckpt.precision, [&](auto tag) {
    using Real = decltype(tag);
    return prediction_error_stats<Real>(ckpt.model<Real>(), data.samples, schedule, o);
  });
  stats.write_csv(rec.out_dir / "errstats.csv");
  rec.outputs.push_back("errstats.csv");
  rec.write();
  std::size_t tested = 0, rejected = 0;
  for (const auto& e : stats.entries) {
    tested += e.tested;
    rejected += e.tested && e.reject;
  }
  out << "prediction error (" << stats.mode << "): " << stats.entries.size() << " steps, E_t[nu_t] = " << stats.mean_nu
      << ", normality rejected at " << rejected << " of " << tested << " tested steps\n";
  return 0;
}

// ---- metrics -----------------------------------------------------------

struct MetricArgs {
  std::string real, generated, out;
  std::size_t k = 3;
  std::int64_t seed = 0;
  int threads = 0;
};

int cmd_metrics(const MetricArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  set_threads(a.threads);
  RunRecord rec;
  rec.command = "metrics";
  rec.args = raw;
  rec.out_dir = a.out;
  rec.seed = static_cast<std::uint64_t>(a.seed);
  const NdArray<double> real = load_points(a.real), gen = load_points(a.generated);
  fs::create_directories(rec.out_dir);
  std::vector<MetricReport> rows;
  const std::size_t nr = real.rows(), ng = gen.rows();
  rows.push_back({"energy_distance", energy_distance(real, gen), nr, ng, rec.seed});
  rows.push_back({"frechet_distance", frechet_gaussian_distance(real, gen), nr, ng, rec.seed});
  const auto pr = knn_precision_recall(real, gen, a.k);
  rows.push_back({"precision_k" + std::to_string(a.k), pr.precision, nr, ng, rec.seed});
  rows.push_back({"recall_k" + std::to_string(a.k), pr.recall, nr, ng, rec.seed});
  write_metric_csv(rec.out_dir / "metrics.csv", rows);
  rec.outputs.push_back("metrics.csv");
  rec.write();
  for (const auto& r : rows) out << r.metric << " = " << r.value << '\n';
  return 0;
}

// ---- grid-gamma --------------------------------------------------------

struct GridArgs {
  std::string config, out, range = "0:0.2:0.025";
  int seeds = 1;
  int threads = 0;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_grid_gamma(const GridArgs& a, const std::vector<std::string>& raw, std::ostream& out) {
  RunRecord rec;
  rec.command = "grid-gamma";
  rec.args = raw;
  ExperimentConfig base = load_config(a.config);
  if (auto env_threads = apply_env_overrides(base)) set_threads(*env_threads);
  set_threads(a.threads);
  if (a.seeds < 1) throw InvalidArgument("--seeds must be >= 1");
  const auto gammas = parse_gamma_grid(a.range).values();
  rec.out_dir = a.out.empty() ? fs::path(base.output_dir) : fs::path(a.out);
  rec.seed = base.seed;
  rec.config_hash = config_hash(base);
  fs::create_directories(rec.out_dir);

  std::ofstream csv(rec.out_dir / "grid_gamma.csv");
  if (!csv) throw IoError("cannot write grid_gamma.csv");
  csv << "gamma,seeds,energy_distance,frechet_distance,precision,recall,final_loss\n";
  double best_gamma = 0.0, best_energy = INFINITY;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    std::vector<double> energy, frechet, precision, recall, loss;
    for (int s = 0; s < a.seeds; ++s) {
      ExperimentConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(s);
      cfg.derive_seeds();
      cfg.train.mode = TrainMode::ip;
      cfg.train.gamma = gammas[g];
      const Dataset data = load_dataset(cfg.dataset, cfg.data_seed());
      const NoiseSchedule schedule = make_schedule(cfg.schedule);
      const auto arch = cfg.model.architecture(data.dim());
      const NdArray<double> reference =
          sample_rows(data.samples, std::min(cfg.evaluation.metric_samples, data.size()),
                      derive_seed(cfg.seed, "eval-reference"));
      with_precision(cfg.train.precision, [&](auto tag) {
        using Real = decltype(tag);
        const auto state = train<Real>(data, cfg.train, cfg.schedule, arch);
        const auto model = cfg.sample.use_ema ? state.ema_model() : state.model;
        const auto gen = sample<Real>(model, reference.rows(), data.dim(), schedule, cfg.sample.sampler)
                             .final.template cast<double>();
        energy.push_back(energy_distance(gen, reference));
        frechet.push_back(frechet_gaussian_distance(gen, reference));
        const auto pr = knn_precision_recall(reference, gen, cfg.evaluation.knn_k);
        precision.push_back(pr.precision);
        recall.push_back(pr.recall);
        loss.push_back(state.history.mean());
        return 0;
      });
    }
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", gammas[g], a.seeds, median(energy),
                  median(frechet), median(precision), median(recall), median(loss));
    csv << buf;
    if (median(energy) < best_energy) {
      best_energy = median(energy);
      best_gamma = gammas[g];
    }
    out << "gamma " << gammas[g] << ": energy distance " << median(energy) << '\n';
  }
  csv.close();
  rec.outputs.push_back("grid_gamma.csv");
  rec.write();
  out << "best gamma " << best_gamma << " (energy distance " << best_energy << ")\n";
  return 0;
}

// ---- replay ------------------------------------------------------------

int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open manifest " + manifest_path);
  const Json m = Json::parse(in);
  auto args = strip_out(m.at("args").get<std::vector<std::string>>());
  if (!args.empty() && args.front() == "replay") throw InvalidArgument("refusing to replay a replay");
  args.push_back("--out");
  args.push_back(out_dir);
  const int code = run_cli(args, out, err);
  if (code != 0) return code;
  std::ifstream again(fs::path(out_dir) / "manifest.json");
  const Json fresh = Json::parse(again);
  bool same = true;
  for (const auto& [name, digest] : m.at("outputs").items()) {
    const bool match = fresh.at("outputs").contains(name) && fresh.at("outputs").at(name) == digest;
    out << (match ? "MATCH " : "DIFF  ") << name << '\n';
    same = same && match;
  }
  out << (same ? "replay reproduced every output\n" : "replay differs from the recorded outputs\n");
  return same ? 0 : 3;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"difflab: desk-scale diffusion-model laboratory", "difflab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "train a denoiser from a config file");
  train_cmd->add_option("--config", ta.config, "experiment config (JSON)")->required();
  train_cmd->add_option("--out", ta.out, "output directory (overrides the config)");
  train_cmd->add_option("--threads", ta.threads, "OpenMP threads");

  SampleArgs sa;
  auto* sample_cmd = app.add_subcommand("sample", "draw samples from a checkpoint");
  sample_cmd->add_option("--checkpoint", sa.checkpoint)->required();
  sample_cmd->add_option("--out", sa.out)->required();
  sample_cmd->add_option("--steps", sa.steps, "reverse steps T' (respaced when below T)");
  sample_cmd->add_option("--kind", sa.kind, "ancestral | deterministic | ddim");
  sample_cmd->add_option("--eta", sa.eta, "DDIM stochasticity in [0, 1]");
  sample_cmd->add_option("--variance", sa.variance, "posterior_small | beta_large");
  sample_cmd->add_option("--n", sa.n, "number of samples");
  sample_cmd->add_option("--seed", sa.seed, "master seed for the sampler streams");
  sample_cmd->add_flag("--raw", sa.raw, "use raw weights instead of the EMA copy");
  sample_cmd->add_option("--threads", sa.threads);

  BiasArgs ba;
  auto* bias_cmd = app.add_subcommand("bias", "measure exposure bias");
  bias_cmd->add_option("--checkpoint", ba.checkpoint)->required();
  bias_cmd->add_option("--out", ba.out)->required();
  bias_cmd->add_option("--mode", ba.mode, "det | stoch");
  bias_cmd->add_option("--t-grid", ba.t_grid, "comma-separated steps");
  bias_cmd->add_option("--n", ba.n, "draws (det) or chains per step (stoch)");
  bias_cmd->add_option("--buckets", ba.buckets, "bucket count when no grid is given (det)");
  bias_cmd->add_option("--seed", ba.seed);
  bias_cmd->add_option("--threads", ba.threads);

  ErrArgs ea;
  auto* err_cmd = app.add_subcommand("errstats", "prediction-error statistics and normality tests");
  err_cmd->add_option("--checkpoint", ea.checkpoint)->required();
  err_cmd->add_option("--out", ea.out)->required();
  err_cmd->add_option("--stride", ea.stride);
  err_cmd->add_option("--n", ea.n, "samples per step (>= 100)");
  err_cmd->add_option("--lead-steps", ea.lead_steps, "0 = teacher-forced, L >= 1 = L generated steps");
  err_cmd->add_option("--test", ea.test, "shapiro_wilk | anderson_darling");
  err_cmd->add_option("--seed", ea.seed);
  err_cmd->add_option("--threads", ea.threads);

  MetricArgs ma;
  auto* metrics_cmd = app.add_subcommand("metrics", "distribution distances between two sample files");
  metrics_cmd->add_option("--real", ma.real, "csv, tensor, or a checkpoint (its training data)")->required();
  metrics_cmd->add_option("--generated", ma.generated)->required();
  metrics_cmd->add_option("--out", ma.out)->required();
  metrics_cmd->add_option("--k", ma.k, "neighbourhood size for precision/recall");
  metrics_cmd->add_option("--seed", ma.seed);
  metrics_cmd->add_option("--threads", ma.threads);

  GridArgs ga;
  auto* grid_cmd = app.add_subcommand("grid-gamma", "train input-perturbation arms over a gamma grid");
  grid_cmd->add_option("--config", ga.config)->required();
  grid_cmd->add_option("--out", ga.out);
  grid_cmd->add_option("--range", ga.range, "start:stop:step");
  grid_cmd->add_option("--seeds", ga.seeds, "master seeds per gamma (median reported)");
  grid_cmd->add_option("--threads", ga.threads);

  std::string manifest, replay_out;
  auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its manifest and compare outputs");
  replay_cmd->add_option("--manifest", manifest)->required();
  replay_cmd->add_option("--out", replay_out)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    if (*train_cmd) return cmd_train(ta, args, out);
    if (*sample_cmd) return cmd_sample(sa, args, out);
    if (*bias_cmd) return cmd_bias(ba, args, out);
    if (*err_cmd) return cmd_errstats(ea, args, out);
    if (*metrics_cmd) return cmd_metrics(ma, args, out);
    if (*grid_cmd) return cmd_grid_gamma(ga, args, out);
    if (*replay_cmd) return cmd_replay(manifest, replay_out, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace difflab
