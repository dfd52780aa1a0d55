// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance gate. Runs every criterion (or those named on the command line),
// prints one PASS/FAIL line each and exits nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "difflab/checkpoint.hpp"
#include "difflab/cli.hpp"
#include "difflab/config.hpp"
#include "difflab/evaluation.hpp"
#include "difflab/forward.hpp"
#include "difflab/kernels.hpp"
#include "difflab/metrics.hpp"
#include "difflab/normality.hpp"
#include "difflab/sampling.hpp"
#include "difflab/training.hpp"
#include "oracles.hpp"

using namespace difflab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [failed: " + what + "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("difflab_acceptance_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig golden_config() {
  return load_config(fs::path(DIFFLAB_SOURCE_DIR) / "configs" / "golden_2d.json");
}

// ---- forward-process identity --------------------------------------------

void ac1(Outcome& o) {
  const auto s = make_linear_schedule(1000);
  const std::size_t n = 100000;
  const double gamma = 0.1;
  const NdArray<double> x0(Shape{n, 1}, 0.5);
  double worst_z = 0.0, min_p = 1.0;
  for (int t : {1, 250, 500, 750, 1000}) {
    Rng rng(derive_seed(1, "ac1", static_cast<std::uint64_t>(t)));
    NdArray<double> eps(Shape{n, 1}), xi(Shape{n, 1}), eps2(Shape{n, 1});
    rng.fill_normal<double>(eps.data());
    rng.fill_normal<double>(xi.data());
    rng.fill_normal<double>(eps2.data());
    const auto y = q_sample_perturbed(x0, t, eps, xi, gamma, s);

    // Variance with its Monte-Carlo standard error from the fourth moment.
    const std::vector<double> v(y.data().begin(), y.data().end());
    const double m = oracle::mean(v);
    double m2 = 0.0, m4 = 0.0;
    for (double x : v) {
      const double d = (x - m) * (x - m);
      m2 += d;
      m4 += d * d;
    }
    m2 /= double(n);
    m4 /= double(n);
    const double var = m2 * double(n) / double(n - 1);
    const double se = std::sqrt((m4 - m2 * m2) / double(n));
    const double expected = (1.0 - s.alpha_bar(t)) * (1.0 + gamma * gamma);
    const double z = std::abs(var - expected) / se;
    worst_z = std::max(worst_z, z);
    o.require(z <= 4.0, "variance at t=" + std::to_string(t) + " off by " + fmt(z) + " SE");

    const auto scaled = q_sample_scaled(x0, t, eps2, gamma, s);
    const double p = energy_permutation_test(y, scaled, 499, static_cast<std::uint64_t>(t)).p_value;
    min_p = std::min(min_p, p);
    o.require(p > 0.01, "energy test at t=" + std::to_string(t) + " p=" + fmt(p));
  }
  o.detail << "worst |z|=" << fmt(worst_z) << " min energy-test p=" << fmt(min_p);
}

// ---- reduction invariants --------------------------------------------------

void ac2(Outcome& o) {
  const auto s = make_linear_schedule(1000);
  MlpArchitecture arch;
  arch.hidden = {32, 32};
  arch.embed_dim = 16;
  const auto x0 = oracle::normal_matrix(128, 2, 3, 0.5);
  int checked = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto model = init_mlp<double>(arch, seed);
    auto with = [&](auto f) {
      Rng rng(derive_seed(seed, "ac2"));
      return f(rng).item();
    };
    const double base = with([&](Rng& r) { return loss_standard(model, x0, r, s); });
    o.require(with([&](Rng& r) { return loss_ip(model, x0, r, s, 0.0); }) == base, "ip(0) != standard");
    o.require(with([&](Rng& r) { return loss_ddpm_y(model, x0, r, s, 0.0); }) == base, "ddpm_y(0) != standard");
    o.require(with([&](Rng& r) { return loss_gp(model, x0, r, s, 0.0); }) == base, "gp(0) != standard");
    o.require(with([&](Rng& r) { return loss_wd(model, x0, r, s, 0.0); }) == base, "wd(0) != standard");
    checked += 4;
  }
  // The float32 path must reduce just as exactly.
  const auto model = init_mlp<float>(arch, 4);
  const auto x0f = x0.cast<float>();
  Rng a(5), b(5), c(5);
  const float base = loss_standard(model, x0f, a, s).item();
  o.require(loss_ip(model, x0f, b, s, 0.0).item() == base, "float ip(0) != standard");
  o.require(loss_ddpm_y(model, x0f, c, s, 0.0).item() == base, "float ddpm_y(0) != standard");
  o.detail << checked + 2 << " bit-exact comparisons";
}

// ---- gradient correctness --------------------------------------------------

void ac3(Outcome& o) {
  const auto s = make_linear_schedule(1000);
  MlpArchitecture arch;
  arch.hidden = {16, 16};
  arch.embed_dim = 8;
  auto model = init_mlp<double>(arch, 7);
  const auto x0 = oracle::normal_matrix(16, 2, 8, 0.5);

  Rng pick(9);
  std::vector<std::pair<std::size_t, std::size_t>> coords;
  for (int k = 0; k < 24; ++k) {
    const auto p = static_cast<std::size_t>(pick.uniform_int(0, int(model.parameters().size()) - 1));
    const auto i = static_cast<std::size_t>(pick.uniform_int(0, int(model.parameters()[p].size()) - 1));
    coords.emplace_back(p, i);
  }

  auto worst = [&](const std::function<ad::Tensor<double>(Rng&)>& loss) {
    auto eval = [&] {
      Rng rng(derive_seed(3, "ac3"));
      return loss(rng);
    };
    for (auto& p : model.parameters()) p.clear_grad();
    ad::backward(eval());
    double w = 0.0;
    for (auto [p, i] : coords) {
      auto& param = model.parameters()[p];
      const double analytic = param.grad() ? (*param.grad())[i] : 0.0;
      const double orig = param.value()[i];
      auto f = [&](double v) {
        param.mutable_value()[i] = v;
        ad::NoGradGuard ng;
        return eval().item();
      };
      const double fd = oracle::central_difference(f, orig, 1e-5);
      param.mutable_value()[i] = orig;
      w = std::max(w, oracle::relative_error(analytic, fd, 1e-7));
    }
    return w;
  };

  const std::map<std::string, std::function<ad::Tensor<double>(Rng&)>> losses = {
      {"standard", [&](Rng& r) { return loss_standard(model, x0, r, s); }},
      {"ip", [&](Rng& r) { return loss_ip(model, x0, r, s, 0.1); }},
      {"ddpm_y", [&](Rng& r) { return loss_ddpm_y(model, x0, r, s, 0.1); }},
      {"gp", [&](Rng& r) { return loss_gp(model, x0, r, s, 0.5); }},
      {"wd", [&](Rng& r) { return loss_wd(model, x0, r, s, 0.03); }}};
  double overall = 0.0;
  for (const auto& [name, loss] : losses) {
    const double w = worst(loss);
    overall = std::max(overall, w);
    o.require(w <= 1e-4, name + " gradient rel err " + fmt(w));
  }

  // Exact Jacobian Frobenius norm of the denoiser against finite differences in x.
  double jac_worst = 0.0;
  for (int t : {1, 300, 900}) {
    const auto x = oracle::normal_matrix(1, 2, 10 + static_cast<std::uint64_t>(t), 0.5);
    const std::vector<int> ts{t};
    auto f = [&](const ad::Tensor<double>& in) { return model.forward(in, ts); };
    const double exact = ad::jacobian_frobenius_sq<double>(f, x).item();
    double fd = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
      auto xp = x, xm = x;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      const auto fp = model.predict(xp, t), fm = model.predict(xm, t);
      for (std::size_t k = 0; k < 2; ++k) {
        const double d = (fp[k] - fm[k]) / 2e-6;
        fd += d * d;
      }
    }
    jac_worst = std::max(jac_worst, oracle::relative_error(exact, fd));
  }
  o.require(jac_worst <= 1e-5, "Jacobian rel err " + fmt(jac_worst));
  o.detail << "worst loss-gradient rel err " << fmt(overall) << ", Jacobian rel err " << fmt(jac_worst);
}

// ---- analytic-oracle sampler -------------------------------------------------

void ac4(Outcome& o) {
  const auto s = make_linear_schedule(1000);
  const std::vector<double> mu{0.3, -0.5};
  const double sigma2 = 0.25;
  AnalyticGaussianDenoiser<double> exact(mu, sigma2, s);
  const std::size_t n = 10000;
  const double se_mean = std::sqrt(sigma2 / double(n)), se_var = sigma2 * std::sqrt(2.0 / double(n - 1));
  double worst = 0.0;
  auto check = [&](const std::string& name, SamplerConfig c) {
    const auto x = sample<double>(exact, n, 2, s, c).final;
    for (std::size_t j = 0; j < 2; ++j) {
      const auto col = oracle::column(x, j);
      const double zm = std::abs(oracle::mean(col) - mu[j]) / se_mean;
      const double zv = std::abs(oracle::variance(col) - sigma2) / se_var;
      worst = std::max({worst, zm, zv});
      o.require(zm <= 4.0, name + " mean z=" + fmt(zm));
      o.require(zv <= 4.0, name + " variance z=" + fmt(zv));
    }
  };
  SamplerConfig c;
  c.seed = 11;
  check("ancestral", c);
  c.kind = SamplerKind::ddim;
  for (double eta : {0.0, 0.5, 1.0}) {
    c.eta = eta;
    check("ddim eta=" + fmt(eta), c);
  }
  o.detail << "worst |z|=" << fmt(worst) << " over 4 samplers";
}

// ---- exposure-bias trend -----------------------------------------------------

void ac5(Outcome& o) {
  ExperimentConfig cfg = golden_config();
  cfg.train.total_iters = 4000;
  cfg.train.checkpoint_every = 0;
  const Dataset data = load_dataset(cfg.dataset, cfg.data_seed());
  const auto schedule = make_schedule(cfg.schedule);
  const auto state = train<float>(data, cfg.train, cfg.schedule, cfg.model.architecture(data.dim()));
  const auto model = state.ema_model();
  // Chain lengths spaced evenly in log t over the whole chain. On 2-D data x_t
  // forgets x0 by t ~ 400, so an evenly spaced grid would put most points on
  // the plateau where only sampling noise orders them.
  std::vector<int> grid;
  for (int k = 0; k < 10; ++k) grid.push_back(static_cast<int>(std::lround(std::pow(1000.0, k / 9.0))));

  DeterministicBiasOptions d;
  d.iterations = 4000;
  d.t_grid = grid;
  d.seed = derive_seed(cfg.seed, "ac5-det");
  const auto det = exposure_bias_deterministic<float>(model, data.samples, schedule, d);
  for (const auto& e : det.entries)
    o.require(e.count == 0 || (e.value >= 0.0 && e.value <= 2.0), "delta_bar out of [0, 2] at t=" +
                                                                        std::to_string(e.t));
  const double rho_det = spearman(det.steps(), det.values());
  o.require(det.values().size() == grid.size(), "deterministic grid incomplete");
  o.require(rho_det > 0.9, "deterministic Spearman " + fmt(rho_det));

  StochasticBiasOptions st;
  st.t_list = grid;
  st.n_chains = 2000;
  st.sampler.kind = SamplerKind::ancestral;
  st.seed = derive_seed(cfg.seed, "ac5-stoch");
  const auto stoch = exposure_bias_stochastic<float>(model, data.samples, schedule, st);
  const double rho_st = spearman(stoch.steps(), stoch.values());
  o.require(rho_st > 0.9, "stochastic Spearman " + fmt(rho_st));

  o.detail << "delta_bar " << fmt(det.values().front()) << ".." << fmt(det.values().back()) << " rho=" << fmt(rho_det)
           << "; stochastic " << stoch.metric << ' ' << fmt(stoch.values().front()) << ".."
           << fmt(stoch.values().back()) << " rho=" << fmt(rho_st);
}

// ---- input perturbation against the baseline ---------------------------------

void ac6(Outcome& o) {
  const ExperimentConfig base = golden_config();
  o.require(base.train.total_iters >= 2000, "golden config trains fewer than 2000 iterations");
  const std::vector<int> step_counts{10, 100, 1000};
  const std::vector<std::pair<TrainMode, double>> arms{
      {TrainMode::standard, 0.0}, {TrainMode::ip, 0.1}, {TrainMode::ddpm_y, 0.1}};
  const int seeds = 5;
  // energy[arm][steps] over seeds
  std::vector<std::vector<std::vector<double>>> energy(arms.size(),
                                                        std::vector<std::vector<double>>(step_counts.size()));
  for (int seed = 0; seed < seeds; ++seed) {
    for (std::size_t a = 0; a < arms.size(); ++a) {
      ExperimentConfig cfg = base;
      cfg.seed = base.seed + static_cast<std::uint64_t>(seed);
      cfg.train.mode = arms[a].first;
      cfg.train.gamma = arms[a].second;
      cfg.train.checkpoint_every = 0;
      cfg.derive_seeds();
      const Dataset data = load_dataset(cfg.dataset, cfg.data_seed());
      const auto schedule = make_schedule(cfg.schedule);
      const NdArray<double> reference = sample_rows(data.samples, cfg.evaluation.metric_samples,
                                                    derive_seed(cfg.seed, "eval-reference"));
      const auto state = train<float>(data, cfg.train, cfg.schedule, cfg.model.architecture(data.dim()));
      const auto model = state.ema_model();
      std::cout << "  AC6 seed " << cfg.seed << ' ' << to_string(arms[a].first) << ':';
      for (std::size_t k = 0; k < step_counts.size(); ++k) {
        SamplerConfig sc = cfg.sample.sampler;
        sc.steps = step_counts[k] == schedule.steps() ? 0 : step_counts[k];
        const auto gen = sample<float>(model, reference.rows(), data.dim(), schedule, sc).final.cast<double>();
        energy[a][k].push_back(energy_distance(gen, reference));
        std::cout << " T'=" << step_counts[k] << ' ' << fmt(energy[a][k].back());
      }
      std::cout << std::endl;
    }
  }
  for (std::size_t k = 0; k < step_counts.size(); ++k) {
    const double std_med = median(energy[0][k]), ip_med = median(energy[1][k]), y_med = median(energy[2][k]);
    const std::string at = "T'=" + std::to_string(step_counts[k]);
    o.require(ip_med <= std_med, "ip median above standard at " + at);
    o.require(y_med >= ip_med, "ddpm_y median below ip at " + at);
    o.detail << (k ? "; " : "median energy distance ") << at << " standard " << fmt(std_med) << " ip " << fmt(ip_med)
             << " ddpm_y " << fmt(y_med);
  }
}

// ---- respacing, determinism and replay ----------------------------------------

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void ac7(Outcome& o) {
  const auto dir = scratch("ac7");
  nlohmann::ordered_json j = config_to_json(golden_config());
  j["dataset"]["n"] = 1000;
  j["schedule"]["steps"] = 100;
  j["model"]["hidden"] = {32, 32};
  j["model"]["embed_dim"] = 16;
  j["train"]["total_iters"] = 200;
  j["train"]["checkpoint_every"] = 100;
  j["sample"]["n"] = 256;
  j["evaluation"]["metric_samples"] = 256;
  j["evaluation"]["bias_iterations"] = 200;
  j["evaluation"]["bias_chains"] = 64;
  const auto config = dir / "small.json";
  std::ofstream(config) << j.dump(2);

  const auto train_dir = dir / "train";
  auto r = cli({"train", "--config", config.string(), "--out", train_dir.string(), "--threads", "1"});
  o.require(r.code == 0, "train failed: " + r.err);
  if (r.code != 0) return;
  const auto ckpt_path = checkpoint_path(train_dir, 200);
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const auto model = ckpt.model<float>(true);
  const auto schedule = make_schedule(ckpt.schedule);

  // Respacing with T' = T against the direct chain.
  int identical = 0;
  for (auto kind : {SamplerKind::ancestral, SamplerKind::deterministic, SamplerKind::ddim}) {
    SamplerConfig a;
    a.kind = kind;
    a.eta = 0.5;
    a.seed = 21;
    SamplerConfig b = a;
    b.steps = schedule.steps();
    const bool same = sample<float>(model, 256, 2, schedule, a).final == sample<float>(model, 256, 2, schedule, b).final;
    o.require(same, "T'=T differs for " + to_string(kind));
    identical += same;
  }

  // DDIM eta = 0 across independent runs, in-process and through the CLI.
  SamplerConfig d;
  d.kind = SamplerKind::ddim;
  d.eta = 0.0;
  d.steps = 10;
  d.seed = 5;
  o.require(sample<float>(model, 256, 2, schedule, d).final == sample<float>(model, 256, 2, schedule, d).final,
            "DDIM eta=0 not reproducible");
  const std::vector<std::string> ddim_args{"sample", "--checkpoint", ckpt_path.string(), "--kind", "ddim",
                                           "--eta",   "0",            "--steps", "10", "--threads", "1"};
  auto with_out = [](std::vector<std::string> args, const fs::path& out) {
    args.push_back("--out");
    args.push_back(out.string());
    return args;
  };
  o.require(cli(with_out(ddim_args, dir / "ddim_a")).code == 0 && cli(with_out(ddim_args, dir / "ddim_b")).code == 0,
            "DDIM CLI run failed");
  o.require(slurp(dir / "ddim_a" / "samples.tensor") == slurp(dir / "ddim_b" / "samples.tensor"),
            "DDIM CLI outputs differ");

  // Every command reproduces from its manifest.
  const std::vector<std::pair<std::string, std::vector<std::string>>> commands{
      {"sample", {"sample", "--checkpoint", ckpt_path.string(), "--threads", "1"}},
      {"bias", {"bias", "--checkpoint", ckpt_path.string(), "--t-grid", "10,50,100", "--n", "100", "--threads", "1"}},
      {"bias-stoch",
       {"bias", "--checkpoint", ckpt_path.string(), "--mode", "stoch", "--t-grid", "0,20,60", "--n", "64", "--threads",
        "1"}},
      {"errstats", {"errstats", "--checkpoint", ckpt_path.string(), "--stride", "25", "--n", "100", "--threads", "1"}},
      {"metrics",
       {"metrics", "--real", ckpt_path.string(), "--generated", (dir / "ddim_a" / "samples.tensor").string(),
        "--threads", "1"}},
      {"grid-gamma", {"grid-gamma", "--config", config.string(), "--range", "0:0.1:0.1", "--threads", "1"}}};
  std::vector<std::pair<std::string, fs::path>> manifests{{"train", train_dir / "manifest.json"}};
  for (const auto& [name, args] : commands) {
    const auto out = dir / name;
    const auto run = cli(with_out(args, out));
    o.require(run.code == 0, name + " failed: " + run.err);
    manifests.emplace_back(name, out / "manifest.json");
  }
  int replayed = 0;
  for (const auto& [name, manifest] : manifests) {
    const auto run = cli({"replay", "--manifest", manifest.string(), "--out", (dir / ("replay_" + name)).string()});
    const bool ok = run.code == 0 && run.out.find("MATCH") != std::string::npos;
    o.require(ok, "replay of " + name + " exited " + std::to_string(run.code));
    replayed += ok;
  }
  o.detail << identical << "/3 samplers bit-identical at T'=T, DDIM eta=0 reproducible, " << replayed << '/'
           << manifests.size() << " manifests replayed bit-exactly";
  fs::remove_all(dir);
}

// ---- normality harness calibration ---------------------------------------------

void ac8(Outcome& o) {
  Rng rng(derive_seed(8, "ac8"));
  const int trials = 1000;
  std::vector<double> x(50);
  std::map<std::string, std::pair<int, int>> counts;
  for (auto test : {NormalityTest::shapiro_wilk, NormalityTest::anderson_darling}) {
    int false_rej = 0, power = 0;
    for (int k = 0; k < trials; ++k) {
      for (auto& v : x) v = rng.normal();
      false_rej += normality_test(test, x).reject;
      for (auto& v : x) v = rng.uniform();
      power += normality_test(test, x).reject;
    }
    const double size = false_rej / double(trials), pw = power / double(trials);
    o.require(std::abs(size - 0.05) <= 0.02, to_string(test) + " size " + fmt(size));
    o.require(pw > 0.5, to_string(test) + " power " + fmt(pw));
    o.detail << (test == NormalityTest::shapiro_wilk ? "" : "; ") << to_string(test) << " size " << fmt(size)
             << " power " << fmt(pw);
  }
}

// ---- metric oracles --------------------------------------------------------------

void ac9(Outcome& o) {
  double frechet_err = 0.0;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto x = oracle::normal_matrix(800, 1, seed, 0.6, 0.2), y = oracle::normal_matrix(600, 1, seed + 10, 1.7, -0.9);
    const auto cx = oracle::column(x, 0), cy = oracle::column(y, 0);
    const double ref = oracle::frechet_1d(oracle::mean(cx), oracle::variance(cx), oracle::mean(cy), oracle::variance(cy));
    frechet_err = std::max(frechet_err, std::abs(frechet_gaussian_distance(x, y) - ref));
  }
  o.require(frechet_err <= 1e-8, "Frechet error " + fmt(frechet_err));

  int knn_exact = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto real = oracle::normal_matrix(20, 2, 100 + seed), gen = oracle::normal_matrix(20, 2, 200 + seed, 1.2, 0.3);
    for (std::size_t k : {1, 3, 5}) {
      const auto pr = knn_precision_recall(real, gen, k);
      const bool same = pr.precision == oracle::coverage(real, gen, k) && pr.recall == oracle::coverage(gen, real, k);
      o.require(same, "kNN mismatch seed " + std::to_string(seed) + " k " + std::to_string(k));
      knn_exact += same;
    }
  }

  double energy_err = 0.0;
  const std::vector<std::pair<NdArray<double>, NdArray<double>>> pairs{
      {oracle::normal_matrix(2000, 1, 5), oracle::normal_matrix(1500, 1, 6, 1.0, 1.0)},
      {oracle::normal_matrix(1000, 2, 7), oracle::normal_matrix(800, 2, 8, 1.5, 0.2)},
      {oracle::normal_matrix(300, 8, 9), oracle::normal_matrix(200, 8, 10, 0.7)}};
  for (const auto& [a, b] : pairs)
    energy_err = std::max(energy_err, std::abs(energy_distance(a, b) - oracle::energy_distance(a, b)));
  o.require(energy_err <= 1e-12, "energy error " + fmt(energy_err));
  o.detail << "Frechet err " << fmt(frechet_err) << ", kNN " << knn_exact << "/30 exact, energy err "
           << fmt(energy_err);
}

struct Criterion {
  std::string name;
  double budget_s;
  void (*run)(Outcome&);
};

}  // namespace

int main(int argc, char** argv) {
  kernels::set_num_threads(1);
  const std::vector<Criterion> criteria{{"AC1", 30, ac1},   {"AC2", 5, ac2},   {"AC3", 120, ac3},
                                        {"AC4", 120, ac4},  {"AC5", 600, ac5}, {"AC6", 3600, ac6},
                                        {"AC7", 60, ac7},   {"AC8", 60, ac8},  {"AC9", 60, ac9}};
  std::vector<std::string> selected(argv + 1, argv + argc);
  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.name) == selected.end()) continue;
    Outcome o;
    const auto start = Clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.failures += std::string(" [exception: ") + e.what() + "]";
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    o.require(secs < c.budget_s, "runtime " + fmt(secs) + " s over the " + fmt(c.budget_s) + " s budget");
    std::cout << c.name << ' ' << (o.pass ? "PASS" : "FAIL") << " (" << fmt(secs) << " s) " << o.detail.str()
              << o.failures << std::endl;
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
