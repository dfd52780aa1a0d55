// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "difflab/errors.hpp"
#include "difflab/evaluation.hpp"
#include "difflab/normality.hpp"
#include "oracles.hpp"

using namespace difflab;

namespace {

// x -> x A for a fixed 2x2 matrix, independent of t.
class LinearModel final : public EpsilonPredictor<double> {
 public:
  explicit LinearModel(std::array<double, 4> a) : a_(a) {}
  using EpsilonPredictor<double>::predict;
  NdArray<double> predict(const NdArray<double>& x, std::span<const int>) const override {
    NdArray<double> out(x.shape());
    for (std::size_t r = 0; r < x.rows(); ++r) {
      out.at(r, 0) = x.at(r, 0) * a_[0] + x.at(r, 1) * a_[2];
      out.at(r, 1) = x.at(r, 0) * a_[1] + x.at(r, 1) * a_[3];
    }
    return out;
  }
  double spectral_norm() const {
    // Largest singular value from the 2x2 Gram matrix.
    const double p = a_[0] * a_[0] + a_[2] * a_[2], q = a_[1] * a_[1] + a_[3] * a_[3];
    const double r = a_[0] * a_[1] + a_[2] * a_[3];
    return std::sqrt(0.5 * (p + q) + std::sqrt(0.25 * (p - q) * (p - q) + r * r));
  }

 private:
  std::array<double, 4> a_;
};

NdArray<double> point_mass(std::size_t n, double x, double y) {
  NdArray<double> a(Shape{n, 2});
  for (std::size_t i = 0; i < n; ++i) {
    a.at(i, 0) = x;
    a.at(i, 1) = y;
  }
  return a;
}

}  // namespace

TEST_CASE("step grids are evenly spaced and deduplicated") {
  CHECK(step_grid(100, 1000, 10) == std::vector<int>{100, 200, 300, 400, 500, 600, 700, 800, 900, 1000});
  CHECK(step_grid(1, 3, 10) == std::vector<int>{1, 2, 3});
  CHECK(step_grid(5, 9, 1) == std::vector<int>{9});
  CHECK_THROWS_AS(step_grid(5, 4, 3), InvalidArgument);
}

TEST_CASE("deterministic bias vanishes for the exact denoiser of a point mass") {
  const auto s = make_linear_schedule(200);
  AnalyticGaussianDenoiser<double> exact({0.3, -0.2}, 0.0, s);
  DeterministicBiasOptions o;
  o.iterations = 300;
  o.t_grid = {20, 100, 200};
  o.seed = 1;
  const auto table = exposure_bias_deterministic<double>(exact, point_mass(50, 0.3, -0.2), s, o);
  CHECK(table.mode == "deterministic");
  CHECK(table.entries.size() == 3);
  std::size_t total = 0;
  for (const auto& e : table.entries) {
    total += e.count;
    CHECK(e.value < 1e-9);
  }
  CHECK(total == 300);
}

TEST_CASE("deterministic bias on a Gaussian grows with chain length and stays bounded") {
  const auto s = make_linear_schedule(1000);
  AnalyticGaussianDenoiser<double> exact({0.0, 0.0}, 0.09, s);
  DeterministicBiasOptions o;
  o.iterations = 10000;
  o.t_grid = step_grid(2, 150, 10);  // past t ~ 200 x_t carries almost no signal and the gap saturates
  o.seed = 2;
  const auto table = exposure_bias_deterministic<double>(exact, oracle::normal_matrix(4000, 2, 3, 0.3), s, o);
  for (const auto& e : table.entries) {
    CHECK(e.value >= 0.0);
    CHECK(e.value <= 2.0);
  }
  CHECK(spearman(table.steps(), table.values()) > 0.9);

  const auto path = std::filesystem::temp_directory_path() / "difflab_bias.csv";
  table.write_csv(path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,n_t,delta_bar");
  std::filesystem::remove(path);
}

TEST_CASE("deterministic bias buckets cover the whole chain") {
  const auto s = make_linear_schedule(100);
  AnalyticGaussianDenoiser<double> exact({0.0, 0.0}, 0.09, s);
  DeterministicBiasOptions o;
  o.iterations = 500;
  o.buckets = 4;
  const auto table = exposure_bias_deterministic<double>(exact, oracle::normal_matrix(100, 2, 4, 0.3), s, o);
  REQUIRE(table.entries.size() == 4);
  CHECK(table.entries[0].t == 25);
  CHECK(table.entries[3].t == 100);
}

TEST_CASE("stochastic bias reports a real-vs-real baseline and validates sizes") {
  const auto s = make_linear_schedule(100);
  AnalyticGaussianDenoiser<double> exact({0.0, 0.0}, 0.09, s);
  const auto data = oracle::normal_matrix(400, 2, 5, 0.3);
  StochasticBiasOptions o;
  o.t_list = {0, 10, 100};
  o.n_chains = 200;
  o.seed = 3;
  const auto table = exposure_bias_stochastic<double>(exact, data, s, o);
  CHECK(table.metric == "energy");
  REQUIRE(table.entries.size() == 3);
  CHECK(table.entries[0].t == 0);
  for (const auto& e : table.entries) CHECK(e.value >= 0.0);
  o.metric = DistanceMetric::frechet;
  CHECK(exposure_bias_stochastic<double>(exact, data, s, o).metric == "frechet");
  o.n_chains = 300;
  CHECK_THROWS_AS(exposure_bias_stochastic<double>(exact, data, s, o), InvalidArgument);
}

TEST_CASE("teacher-forced error spread equals the Gaussian posterior standard deviation") {
  const auto s = make_linear_schedule(1000);
  const double sigma2 = 0.25;
  AnalyticGaussianDenoiser<double> exact({0.0, 0.0}, sigma2, s);
  ErrorStatsOptions o;
  o.t_stride = 100;
  o.n_samples = 2000;
  o.lead_steps = 0;
  o.seed = 4;
  const auto data = oracle::normal_matrix(20000, 2, 6, std::sqrt(sigma2));
  const auto stats = prediction_error_stats<double>(exact, data, s, o);
  CHECK(stats.mode == "teacher_forced");
  REQUIRE(stats.entries.size() == 10);
  for (const auto& e : stats.entries) {
    const double ab = s.alpha_bar(e.t);
    const double expected = std::sqrt(sigma2 * (1.0 - ab) / (ab * sigma2 + 1.0 - ab));
    // Data sampling error of x0 and the error itself; both scale like 1/sqrt(count).
    CHECK(std::abs(e.nu - expected) < 5.0 * expected / std::sqrt(double(e.count)) + 0.01 * expected);
    CHECK(e.count == 4000);
    CHECK(e.tested);
  }
  std::size_t rejects = 0;
  for (const auto& e : stats.entries) rejects += e.reject;
  CHECK(rejects <= 3);
}

TEST_CASE("generation-side errors include the preceding reverse steps") {
  const auto s = make_linear_schedule(200);
  AnalyticGaussianDenoiser<double> exact({0.0, 0.0}, 0.25, s);
  ErrorStatsOptions o;
  o.t_stride = 50;
  o.n_samples = 200;
  o.lead_steps = 3;
  const auto data = oracle::normal_matrix(1000, 2, 7, 0.5);
  const auto stats = prediction_error_stats<double>(exact, data, s, o);
  CHECK(stats.mode == "generation");
  CHECK(stats.entries.size() == 4);
  CHECK(stats.mean_nu > 0.0);
  o.n_samples = 50;
  CHECK_THROWS_AS(prediction_error_stats<double>(exact, data, s, o), InvalidArgument);
}

TEST_CASE("empirical Lipschitz estimates respect the linear bound and vanish for constants") {
  const auto s = make_linear_schedule(100);
  const auto data = oracle::normal_matrix(300, 2, 8);
  const LinearModel lin({1.5, -0.3, 0.8, 2.0});
  const auto est = empirical_lipschitz<double>(lin, data, s, 50, 500, 0.01, 1);
  CHECK(est.max <= lin.spectral_norm() * (1.0 + 1e-9));
  CHECK(est.p95 <= est.max);
  CHECK(est.max > 0.5 * lin.spectral_norm());
  const LinearModel zero({0, 0, 0, 0});
  CHECK(empirical_lipschitz<double>(zero, data, s, 50, 100, 0.01, 1).max == 0.0);
  CHECK_THROWS_AS(empirical_lipschitz<double>(zero, data, s, 50, 100, 0.0, 1), InvalidArgument);
}
