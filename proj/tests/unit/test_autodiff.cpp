// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "difflab/autodiff.hpp"
#include "difflab/errors.hpp"
#include "oracles.hpp"

using namespace difflab;
using T = ad::Tensor<double>;

namespace {

T leaf(std::size_t r, std::size_t c, std::uint64_t seed, bool grad = true) {
  return T(oracle::normal_matrix(r, c, seed), grad);
}

// Checks d loss / d p for every entry of each parameter against central differences.
void check_gradients(const std::function<T()>& build, std::vector<T>& params, double tol = 1e-6) {
  for (auto& p : params) p.clear_grad();
  ad::backward(build());
  for (auto& p : params) {
    REQUIRE(p.grad());
    const NdArray<double> analytic = *p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double orig = p.value()[i];
      auto f = [&](double v) {
        p.mutable_value()[i] = v;
        ad::NoGradGuard ng;
        return build().item();
      };
      const double fd = oracle::central_difference(f, orig, 1e-5);
      p.mutable_value()[i] = orig;
      CHECK(oracle::relative_error(analytic[i], fd, 1e-6) <= tol);
    }
  }
}

}  // namespace

TEST_CASE("matmul matches a naive triple loop") {
  const T a = leaf(5, 4, 1, false), b = leaf(4, 3, 2, false);
  const auto c = ad::matmul(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 4; ++k) s += a.value().at(i, k) * b.value().at(k, j);
      CHECK(c.value().at(i, j) == doctest::Approx(s).epsilon(1e-14));
    }
  CHECK_THROWS_AS(ad::matmul(a, a), ShapeError);
}

TEST_CASE("a loss that ignores its parameters has zero gradient") {
  T w = leaf(3, 2, 3);
  T c(NdArray<double>(Shape{}, 4.0));
  const auto loss = ad::add(ad::scale(ad::sum(w), 0.0), c);
  ad::backward(loss);
  REQUIRE(w.grad());
  for (double g : w.grad()->data()) CHECK(g == 0.0);
}

TEST_CASE("least-squares gradient matches the normal-equation form") {
  const auto x = oracle::normal_matrix(20, 3, 4), y = oracle::normal_matrix(20, 1, 5);
  T w = leaf(3, 1, 6);
  const auto r = ad::sub(ad::matmul(T(x), w), T(y));
  ad::backward(ad::sum(ad::square(r)));
  // 2 X^T (X w - y), coded directly.
  for (std::size_t j = 0; j < 3; ++j) {
    double g = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      double pred = 0.0;
      for (std::size_t k = 0; k < 3; ++k) pred += x.at(i, k) * w.value()[k];
      g += 2.0 * x.at(i, j) * (pred - y.at(i, 0));
    }
    CHECK((*w.grad())[j] == doctest::Approx(g).epsilon(1e-12));
  }
}

TEST_CASE("every differentiable op passes a finite-difference check") {
  T a = leaf(4, 3, 7), b = leaf(4, 3, 8), row = leaf(1, 3, 9), m = leaf(3, 2, 10);
  T pos(NdArray<double>(Shape{4, 3}, std::vector<double>{1.1, 2, 0.7, 3, 1.5, 0.9, 2.2, 1.3, 0.5, 1.7, 2.9, 0.8}), true);
  std::vector<T> params{a, b, row, m, pos};
  auto build = [&] {
    auto h = ad::add(ad::mul(a, b), ad::expand_rows(row, 4));
    h = ad::sub(h, ad::div(b, pos));
    h = ad::add(ad::silu(h), ad::relu(ad::add_scalar(a, 0.3)));
    h = ad::add(h, ad::sqrt(pos));
    auto wide = ad::concat_cols(h, ad::transpose(ad::transpose(a)));
    auto narrow = ad::slice_cols(wide, 1, 4);
    auto padded = ad::pad_cols(ad::matmul(narrow, m), 1, 4);
    auto s = ad::sum_rows(ad::square(padded));
    return ad::add(ad::mean(s), ad::sum(ad::expand_scalar(ad::mean(a), Shape{2, 2})));
  };
  check_gradients(build, params);
}

TEST_CASE("backward releases the tape and refuses a second pass") {
  T w = leaf(2, 2, 11);
  const auto loss = ad::sum(ad::square(w));
  CHECK(ad::backward(loss) > 0);
  CHECK_THROWS_AS(ad::backward(loss), Error);
  CHECK_THROWS_AS(ad::backward(ad::square(w)), ShapeError);
}

TEST_CASE("gradient accumulates across backward calls until cleared") {
  T w = leaf(1, 1, 12);
  ad::backward(ad::sum(w));
  ad::backward(ad::sum(w));
  CHECK((*w.grad())[0] == 2.0);
  w.clear_grad();
  CHECK(w.grad() == nullptr);
}

TEST_CASE("no-grad mode builds no graph") {
  T w = leaf(2, 2, 13);
  ad::NoGradGuard guard;
  const auto y = ad::square(w);
  CHECK_FALSE(y.requires_grad());
}

TEST_CASE("double backward through grad with create_graph") {
  // f(x) = sum(x^3); df/dx = 3x^2; d/dx sum(3x^2) = 6x.
  T x = leaf(1, 3, 14);
  const auto cube = ad::mul(ad::square(x), x);
  const auto g = ad::grad(ad::sum(cube), {x}, T(), true)[0];
  for (std::size_t i = 0; i < 3; ++i) CHECK(g.value()[i] == doctest::Approx(3.0 * x.value()[i] * x.value()[i]));
  ad::backward(ad::sum(g));
  for (std::size_t i = 0; i < 3; ++i) CHECK((*x.grad())[i] == doctest::Approx(6.0 * x.value()[i]));
}

TEST_CASE("timestep embedding uses cosine then sine halves") {
  const std::vector<int> t{0, 7};
  const auto e = ad::timestep_embedding<double>(t, 4, 100.0);
  CHECK(e.at(0, 0) == 1.0);
  CHECK(e.at(0, 2) == 0.0);
  CHECK(e.at(1, 1) == doctest::Approx(std::cos(7.0 * 0.1)));
  CHECK(e.at(1, 3) == doctest::Approx(std::sin(7.0 * 0.1)));
  CHECK_THROWS_AS(ad::timestep_embedding<double>(t, 3), InvalidArgument);
}

TEST_CASE("Jacobian Frobenius norm of linear maps and the identity") {
  const auto a = oracle::normal_matrix(3, 5, 15);
  double fro = 0.0;
  for (double v : a.data()) fro += v * v;
  const T at(a);
  auto linear = [&](const T& x) { return ad::matmul(x, at); };
  const auto x = oracle::normal_matrix(6, 3, 16);
  CHECK(ad::jacobian_frobenius_sq<double>(linear, x).item() == doctest::Approx(fro).epsilon(1e-12));
  auto identity = [](const T& x) { return ad::scale(x, 1.0); };
  CHECK(ad::jacobian_frobenius_sq<double>(identity, oracle::normal_matrix(4, 7, 17)).item() ==
        doctest::Approx(7.0).epsilon(1e-14));
}

TEST_CASE("Jacobian Frobenius norm of a two-layer network matches a finite-difference Jacobian") {
  const T w1(oracle::normal_matrix(4, 6, 18)), w2(oracle::normal_matrix(6, 3, 19)), b1(oracle::normal_matrix(1, 6, 20));
  auto net = [&](const T& x) {
    return ad::matmul(ad::silu(ad::add(ad::matmul(x, w1), ad::expand_rows(b1, x.rows()))), w2);
  };
  const auto x = oracle::normal_matrix(1, 4, 21);
  const double exact = ad::jacobian_frobenius_sq<double>(net, x).item();
  double fd = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    auto xp = x, xm = x;
    xp[i] += 1e-6;
    xm[i] -= 1e-6;
    ad::NoGradGuard ng;
    const auto fp = net(T(xp)).value(), fm = net(T(xm)).value();
    for (std::size_t k = 0; k < 3; ++k) {
      const double d = (fp[k] - fm[k]) / 2e-6;
      fd += d * d;
    }
  }
  CHECK(oracle::relative_error(exact, fd) <= 1e-5);
}

TEST_CASE("Hutchinson estimate is required past the budget and converges to the exact value") {
  const auto a = oracle::normal_matrix(3, 5, 22);
  const T at(a);
  auto linear = [&](const T& x) { return ad::matmul(x, at); };
  const auto x = oracle::normal_matrix(2, 3, 23);
  const double exact = ad::jacobian_frobenius_sq<double>(linear, x).item();
  ad::JacobianOptions opt;
  opt.exact_budget = 2;
  CHECK_THROWS_AS(ad::jacobian_frobenius_sq<double>(linear, x, opt), InvalidArgument);
  opt.hutchinson_probes = 4000;
  opt.probe_seed = 3;
  const double est = ad::jacobian_frobenius_sq<double>(linear, x, opt).item();
  CHECK(oracle::relative_error(est, exact) < 0.05);
}

TEST_CASE("Jacobian penalty is differentiable with respect to parameters") {
  T w = leaf(2, 2, 24);
  auto f = [&](const T& x) { return ad::silu(ad::matmul(x, w)); };
  const auto x = oracle::normal_matrix(3, 2, 25);
  std::vector<T> params{w};
  check_gradients([&] { return ad::jacobian_frobenius_sq<double>(f, x); }, params, 1e-5);
}
