// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "difflab/data.hpp"
#include "difflab/errors.hpp"
#include "difflab/forward.hpp"
#include "difflab/rng.hpp"

namespace difflab {

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_data(const NdArray<double>& data, const char* what) {
  if (data.rank() != 2 || data.rows() == 0) throw InvalidArgument(std::string(what) + ": dataset is empty");
}

std::vector<std::size_t> random_subset(std::size_t population, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.next_u64() % (population - i)]);
  idx.resize(k);
  return idx;
}

}  // namespace

std::vector<double> BiasTable::steps() const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (e.count > 0) out.push_back(e.t);
  return out;
}

std::vector<double> BiasTable::values() const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (e.count > 0) out.push_back(e.value);
  return out;
}

void BiasTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,n_t," << metric << '\n';
  for (const auto& e : entries) out << e.t << ',' << e.count << ',' << (e.count ? fmt(e.value) : "") << '\n';
}

template <typename Real>
BiasTable exposure_bias_deterministic(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                      const NoiseSchedule& schedule, const DeterministicBiasOptions& options) {
  require_data(data, "exposure_bias_deterministic");
  if (options.iterations == 0) throw InvalidArgument("exposure_bias_deterministic needs at least one iteration");
  for (int t : options.t_grid) schedule.check_step(t);
  const int T = schedule.steps();
  const std::size_t n = options.iterations, d = data.cols();

  Rng rng(derive_seed(options.seed, "bias-deterministic"));
  std::vector<std::size_t> rows(n);
  std::vector<int> t(n);
  NdArray<Real> eps(Shape{n, d});
  for (std::size_t i = 0; i < n; ++i) {
    rows[i] = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.rows()) - 1));
    t[i] = options.t_grid.empty()
               ? rng.uniform_int(1, T)
               : options.t_grid[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(options.t_grid.size()) - 1))];
    rng.fill_normal(eps.row(i));
  }

  // Longest chains first, so the rows still running always form a prefix.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] > t[b]; });
  NdArray<Real> x0(Shape{n, d}), noise(Shape{n, d});
  std::vector<int> ts(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      x0[i * d + j] = static_cast<Real>(data.at(rows[order[i]], j));
      noise[i * d + j] = eps[order[i] * d + j];
    }
    ts[i] = t[order[i]];
  }
  NdArray<Real> x = q_sample(x0, ts, noise, schedule);

  const StepTable table = make_step_table(schedule);
  SamplerConfig det;
  det.kind = SamplerKind::deterministic;
  std::size_t active = 0;
  for (int s = ts.front(); s >= 1; --s) {
    while (active < n && ts[active] >= s) ++active;
    NdArray<Real> head = x.slice_rows(0, active);
    head = reverse_step<Real>(model, head, table, s - 1, det, nullptr);
    std::copy(head.data().begin(), head.data().end(), x.data().begin());
  }

  // Accumulate per step, then fold into the reporting bins.
  const std::size_t bins = options.buckets;
  std::map<int, std::pair<std::size_t, double>> acc;
  auto bin_of = [&](int s) {
    if (bins == 0) return s;
    const auto b = static_cast<std::size_t>(s - 1) * bins / static_cast<std::size_t>(T);
    return static_cast<int>((b + 1) * static_cast<std::size_t>(T) / bins);  // upper edge
  };
  if (!options.t_grid.empty()) {
    for (int s : options.t_grid) acc[bin_of(s)];
  } else if (bins > 0) {
    for (std::size_t b = 0; b < bins; ++b) acc[static_cast<int>((b + 1) * static_cast<std::size_t>(T) / bins)];
  } else {
    for (int s = 1; s <= T; ++s) acc[s];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double l1 = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      l1 += std::abs(static_cast<double>(x0[i * d + j]) - static_cast<double>(x[i * d + j]));
    auto& cell = acc[bin_of(ts[i])];
    cell.first += 1;
    cell.second += l1 / static_cast<double>(d);
  }

  BiasTable table_out;
  table_out.mode = "deterministic";
  table_out.metric = "delta_bar";
  for (const auto& [s, cell] : acc)
    table_out.entries.push_back({s, cell.first, cell.first ? cell.second / static_cast<double>(cell.first) : 0.0});
  return table_out;
}

template <typename Real>
BiasTable exposure_bias_stochastic(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                   const NoiseSchedule& schedule, const StochasticBiasOptions& options) {
  require_data(data, "exposure_bias_stochastic");
  if (options.n_chains < 2) throw InvalidArgument("exposure_bias_stochastic needs at least two chains");
  if (data.rows() < 2 * options.n_chains)
    throw InvalidArgument("exposure_bias_stochastic: " + std::to_string(data.rows()) + " real samples, need " +
                          std::to_string(2 * options.n_chains));
  for (int t : options.t_list)
    if (t != 0) schedule.check_step(t);

  const std::size_t n = options.n_chains;
  const NdArray<double> both = sample_rows(data, 2 * n, derive_seed(options.seed, "bias-split"));
  const NdArray<double> source = both.slice_rows(0, n), held_out = both.slice_rows(n, 2 * n);
  DistanceMetric metric = options.metric;
  if (metric == DistanceMetric::automatic) metric = data.cols() <= 16 ? DistanceMetric::energy : DistanceMetric::frechet;
  auto distance = [&](const NdArray<double>& a) {
    return metric == DistanceMetric::energy ? energy_distance(a, held_out) : frechet_gaussian_distance(a, held_out);
  };

  BiasTable out;
  out.mode = "stochastic";
  out.metric = metric == DistanceMetric::energy ? "energy" : "frechet";
  const NdArray<Real> x0 = source.cast<Real>();
  for (int t : options.t_list) {
    if (t == 0) {
      out.entries.push_back({0, n, distance(source)});
      continue;
    }
    Rng rng(derive_seed(options.seed, "bias-noise", static_cast<std::uint64_t>(t)));
    NdArray<Real> eps(x0.shape());
    rng.fill_normal(eps.data());
    SamplerConfig config = options.sampler;
    config.seed = derive_seed(options.seed, "bias-chains", static_cast<std::uint64_t>(t));
    const auto result = reverse_from(model, q_sample(x0, t, eps, schedule), t, schedule, config);
    out.entries.push_back({t, n, distance(result.final.template cast<double>())});
  }
  return out;
}

void ErrorStats::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,count,mu,nu,tested,statistic,p_value,reject,coordinate_reject_rate,coordinate_tests\n";
  for (const auto& e : entries) {
    out << e.t << ',' << e.count << ',' << fmt(e.mu) << ',' << fmt(e.nu) << ',' << (e.tested ? 1 : 0) << ',';
    if (e.tested)
      out << fmt(e.statistic) << ',' << fmt(e.p_value) << ',' << (e.reject ? 1 : 0) << ','
          << fmt(e.coordinate_reject_rate) << ',' << e.coordinate_tests;
    else
      out << ",,,,0";
    out << '\n';
  }
}

template <typename Real>
ErrorStats prediction_error_stats(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                  const NoiseSchedule& schedule, const ErrorStatsOptions& options) {
  require_data(data, "prediction_error_stats");
  if (options.n_samples < 100) throw InvalidArgument("prediction_error_stats needs at least 100 samples per step");
  if (options.t_stride < 1) throw InvalidArgument("t_stride must be positive");
  if (options.lead_steps < 0) throw InvalidArgument("lead_steps must be >= 0");
  if (options.normality_subsample < 3 || options.normality_subsample > options.n_samples)
    throw InvalidArgument("normality_subsample must lie in [3, n_samples]");

  const int T = schedule.steps();
  const std::size_t n = options.n_samples, d = data.cols();
  const StepTable table = make_step_table(schedule);
  Rng row_rng(derive_seed(options.seed, "errstats-rows"));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(row_rng.uniform_int(0, static_cast<int>(data.rows()) - 1));
  NdArray<Real> x0(Shape{n, d});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) x0[i * d + j] = static_cast<Real>(data.at(rows[i], j));

  ErrorStats stats;
  stats.mode = options.lead_steps == 0 ? "teacher_forced" : "generation";
  for (int t = 1; t <= T; t += options.t_stride) {
    const auto tu = static_cast<std::uint64_t>(t);
    Rng rng(derive_seed(options.seed, "errstats-noise", tu));
    NdArray<Real> eps(x0.shape());
    rng.fill_normal(eps.data());
    const int start = std::min(T, t + options.lead_steps);
    NdArray<Real> x = q_sample(x0, start, eps, schedule);
    auto chains = chain_streams(derive_seed(options.seed, "errstats-chains", tu), n);
    NdArray<Real> z(x.shape());
    for (int i = start - 1; i >= t; --i) {
      const bool noisy = step_uses_noise(table, i, options.sampler);
      if (noisy)
        for (std::size_t c = 0; c < n; ++c) chains[c].fill_normal(z.row(c));
      x = reverse_step(model, x, table, i, options.sampler, noisy ? &z : nullptr);
    }
    const NdArray<Real> eps_hat = model.predict(x, std::span<const int>(&t, 1));
    const NdArray<Real> x0_hat = predict_x0(x, t, eps_hat, schedule);

    std::vector<double> e(n * d);
    for (std::size_t k = 0; k < e.size(); ++k) e[k] = static_cast<double>(x0_hat[k]) - static_cast<double>(x0[k]);
    ErrorStatsEntry entry;
    entry.t = t;
    entry.count = e.size();
    entry.mu = std::accumulate(e.begin(), e.end(), 0.0) / static_cast<double>(e.size());
    double ss = 0.0;
    for (double v : e) ss += (v - entry.mu) * (v - entry.mu);
    entry.nu = std::sqrt(ss / static_cast<double>(e.size() - 1));
    if (!std::isfinite(entry.nu)) throw NumericError("non-finite prediction error at step " + std::to_string(t));
    if (entry.nu == 0.0) {
      if (entry.mu != 0.0)
        throw NumericError("prediction error at step " + std::to_string(t) + " is constant and nonzero");
      stats.entries.push_back(entry);
      continue;
    }
    for (double& v : e) v = (v - entry.mu) / entry.nu;

    Rng pick(derive_seed(options.seed, "errstats-pick", tu));
    const std::size_t m = options.normality_subsample;
    std::vector<double> sub(m);
    const auto pooled = random_subset(e.size(), m, pick);
    for (std::size_t k = 0; k < m; ++k) sub[k] = e[pooled[k]];
    try {
      const auto r = normality_test(options.test, sub, options.alpha);
      entry.tested = true;
      entry.statistic = r.statistic;
      entry.p_value = r.p_value;
      entry.reject = r.reject;
    } catch (const InvalidArgument&) {
      // Heavily tied subsample; leave the step untested.
    }
    const std::size_t coords = std::min(d, options.max_coordinate_tests);
    std::size_t rejects = 0;
    for (std::size_t c = 0; c < coords; ++c) {
      const std::size_t j = c * d / coords;
      const auto picks = random_subset(n, m, pick);
      for (std::size_t k = 0; k < m; ++k) sub[k] = e[picks[k] * d + j];
      try {
        rejects += normality_test(options.test, sub, options.alpha).reject ? 1 : 0;
        ++entry.coordinate_tests;
      } catch (const InvalidArgument&) {
      }
    }
    if (entry.coordinate_tests > 0)
      entry.coordinate_reject_rate = static_cast<double>(rejects) / static_cast<double>(entry.coordinate_tests);
    stats.entries.push_back(entry);
  }
  double total = 0.0;
  for (const auto& en : stats.entries) total += en.nu;
  stats.mean_nu = stats.entries.empty() ? 0.0 : total / static_cast<double>(stats.entries.size());
  return stats;
}

template <typename Real>
LipschitzEstimate empirical_lipschitz(const EpsilonPredictor<Real>& model, const NdArray<double>& data,
                                      const NoiseSchedule& schedule, int t, std::size_t n_pairs, double radius,
                                      std::uint64_t seed) {
  require_data(data, "empirical_lipschitz");
  if (!(radius > 0.0)) throw InvalidArgument("empirical_lipschitz needs radius > 0");
  if (n_pairs == 0) throw InvalidArgument("empirical_lipschitz needs at least one pair");
  schedule.check_step(t);
  const std::size_t d = data.cols();
  Rng rng(derive_seed(seed, "lipschitz"));
  NdArray<Real> x0(Shape{n_pairs, d}), eps(Shape{n_pairs, d}), u(Shape{n_pairs, d});
  for (std::size_t i = 0; i < n_pairs; ++i) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(data.rows()) - 1));
    for (std::size_t j = 0; j < d; ++j) x0[i * d + j] = static_cast<Real>(data.at(r, j));
    rng.fill_normal(eps.row(i));
    std::vector<double> dir(d);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (auto& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
    } while (norm == 0.0);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) u[i * d + j] = static_cast<Real>(dir[j] / norm);
  }
  const NdArray<Real> x = q_sample(x0, t, eps, schedule);
  NdArray<Real> y(x.shape());
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + static_cast<Real>(radius) * u[k];
  const NdArray<Real> fx = model.predict(x, t), fy = model.predict(y, t);

  std::vector<double> ratios(n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double df = static_cast<double>(fx[i * d + j]) - static_cast<double>(fy[i * d + j]);
      const double dx = static_cast<double>(x[i * d + j]) - static_cast<double>(y[i * d + j]);
      num += df * df;
      den += dx * dx;
    }
    ratios[i] = den > 0.0 ? std::sqrt(num / den) : 0.0;
  }
  std::sort(ratios.begin(), ratios.end());
  LipschitzEstimate est;
  est.pairs = n_pairs;
  est.max = ratios.back();
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n_pairs)));
  est.p95 = ratios[std::max<std::size_t>(rank, 1) - 1];
  return est;
}

std::vector<int> step_grid(int lo, int hi, std::size_t points) {
  if (points == 0 || lo > hi) throw InvalidArgument("step_grid: need points >= 1 and lo <= hi");
  std::vector<int> out;
  for (std::size_t k = 0; k < points; ++k) {
    const double f = points == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(points - 1);
    const int v = static_cast<int>(std::lround(lo + f * (hi - lo)));
    if (out.empty() || out.back() != v) out.push_back(v);
  }
  return out;
}

#define DIFFLAB_INSTANTIATE(R)                                                                                  \
  template BiasTable exposure_bias_deterministic(const EpsilonPredictor<R>&, const NdArray<double>&,            \
                                                 const NoiseSchedule&, const DeterministicBiasOptions&);        \
  template BiasTable exposure_bias_stochastic(const EpsilonPredictor<R>&, const NdArray<double>&,               \
                                              const NoiseSchedule&, const StochasticBiasOptions&);              \
  template ErrorStats prediction_error_stats(const EpsilonPredictor<R>&, const NdArray<double>&,                \
                                             const NoiseSchedule&, const ErrorStatsOptions&);                   \
  template LipschitzEstimate empirical_lipschitz(const EpsilonPredictor<R>&, const NdArray<double>&,            \
                                                 const NoiseSchedule&, int, std::size_t, double, std::uint64_t);
DIFFLAB_INSTANTIATE(float)
DIFFLAB_INSTANTIATE(double)
#undef DIFFLAB_INSTANTIATE

}  // namespace difflab
