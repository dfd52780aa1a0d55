// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/normality.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "difflab/errors.hpp"

namespace difflab {

namespace {

const boost::math::normal_distribution<double> kStdNormal;

double qnorm(double p) { return boost::math::quantile(kStdNormal, p); }
double pnorm(double x) { return boost::math::cdf(kStdNormal, x); }
double pnorm_upper(double x) { return boost::math::cdf(boost::math::complement(kStdNormal, x)); }

// c[0] + c[1] x + c[2] x^2 + ...
template <std::size_t N>
double poly(const std::array<double, N>& c, double x) {
  double r = 0.0;
  for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
  return r;
}

// Royston's approximation constants.
constexpr std::array<double, 6> kC1{0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
constexpr std::array<double, 6> kC2{0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
constexpr std::array<double, 4> kC3{0.544, -0.39978, 0.025054, -6.714e-4};
constexpr std::array<double, 4> kC4{1.3822, -0.77857, 0.062767, -0.0020322};
constexpr std::array<double, 4> kC5{-1.5861, -0.31082, -0.083751, 0.0038915};
constexpr std::array<double, 3> kC6{-0.4803, -0.082676, 0.0030302};
constexpr std::array<double, 2> kG{-2.273, 0.459};

// Coefficients a_1..a_{n/2} for the upper half of the order statistics.
std::vector<double> sw_coefficients(std::size_t n) {
  const std::size_t half = n / 2;
  std::vector<double> a(half);
  if (n == 3) {
    a[0] = std::numbers::sqrt2 / 2.0;
    return a;
  }
  const double an = static_cast<double>(n);
  std::vector<double> m(half);
  double summ2 = 0.0;
  for (std::size_t i = 0; i < half; ++i) {
    m[i] = qnorm((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
    summ2 += m[i] * m[i];
  }
  summ2 *= 2.0;
  const double ssumm2 = std::sqrt(summ2);
  const double rsn = 1.0 / std::sqrt(an);
  const double a1 = poly(kC1, rsn) - m[0] / ssumm2;
  std::size_t first = 1;
  double fac;
  if (n > 5) {
    const double a2 = -m[1] / ssumm2 + poly(kC2, rsn);
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
    a[1] = a2;
    first = 2;
  } else {
    fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
  }
  a[0] = a1;
  for (std::size_t i = first; i < half; ++i) a[i] = -m[i] / fac;
  return a;
}

}  // namespace

NormalityResult shapiro_wilk(std::span<const double> x, double alpha) {
  const std::size_t n = x.size();
  if (n < 3 || n > 5000) throw InvalidArgument("Shapiro-Wilk needs 3 <= n <= 5000, got " + std::to_string(n));
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  if (!std::isfinite(s.front()) || !std::isfinite(s.back())) throw InvalidArgument("Shapiro-Wilk input is not finite");
  if (s.back() - s.front() < 1e-19 * std::max(1.0, std::abs(s.back())))
    throw InvalidArgument("Shapiro-Wilk is undefined for constant input");

  const auto a = sw_coefficients(n);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  double num = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) num += a[i] * (s[n - 1 - i] - s[i]);
  const double w = std::min(1.0, num * num / ss);

  NormalityResult r;
  r.statistic = w;
  r.n = n;
  if (n == 3) {
    constexpr double six_over_pi = 6.0 / std::numbers::pi;
    const double p = six_over_pi * (std::asin(std::sqrt(w)) - std::numbers::pi / 3.0);
    r.p_value = std::clamp(p, 0.0, 1.0);
  } else {
    const double an = static_cast<double>(n);
    double y = std::log1p(-w);
    double mu, sigma;
    if (n <= 11) {
      const double g = poly(kG, an);
      if (y >= g) {
        r.p_value = 1e-99;
        r.reject = true;
        return r;
      }
      y = -std::log(g - y);
      mu = poly(kC3, an);
      sigma = std::exp(poly(kC4, an));
    } else {
      const double ln = std::log(an);
      mu = poly(kC5, ln);
      sigma = std::exp(poly(kC6, ln));
    }
    r.p_value = w >= 1.0 ? 1.0 : pnorm_upper((y - mu) / sigma);
  }
  r.reject = r.p_value < alpha;
  return r;
}

NormalityResult anderson_darling(std::span<const double> x, double alpha) {
  const std::size_t n = x.size();
  if (n < 8) throw InvalidArgument("Anderson-Darling needs n >= 8");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double an = static_cast<double>(n);
  const double mean = std::accumulate(s.begin(), s.end(), 0.0) / an;
  double ss = 0.0;
  for (double v : s) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (an - 1.0));
  if (!(sd > 0.0)) throw InvalidArgument("Anderson-Darling is undefined for constant input");

  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = (s[i] - mean) / sd, zj = (s[n - 1 - i] - mean) / sd;
    // log(Phi(z)) and log(1 - Phi(z)) without cancellation in the tails.
    const double lo = std::log(pnorm(zi));
    const double hi = std::log(pnorm_upper(zj));
    acc += (2.0 * static_cast<double>(i) + 1.0) * (lo + hi);
  }
  const double a2 = -an - acc / an;
  const double astar = a2 * (1.0 + 0.75 / an + 2.25 / (an * an));
  double p;
  if (astar >= 0.6)
    p = std::exp(1.2937 - 5.709 * astar + 0.0186 * astar * astar);
  else if (astar >= 0.34)
    p = std::exp(0.9177 - 4.279 * astar - 1.38 * astar * astar);
  else if (astar >= 0.2)
    p = 1.0 - std::exp(-8.318 + 42.796 * astar - 59.938 * astar * astar);
  else
    p = 1.0 - std::exp(-13.436 + 101.14 * astar - 223.73 * astar * astar);

  NormalityResult r;
  r.statistic = astar;
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.reject = r.p_value < alpha;
  r.n = n;
  return r;
}

std::string to_string(NormalityTest t) {
  return t == NormalityTest::shapiro_wilk ? "shapiro_wilk" : "anderson_darling";
}

NormalityTest parse_normality_test(const std::string& s) {
  if (s == "shapiro_wilk") return NormalityTest::shapiro_wilk;
  if (s == "anderson_darling") return NormalityTest::anderson_darling;
  throw InvalidArgument("unknown normality test '" + s + "'");
}

NormalityResult normality_test(NormalityTest test, std::span<const double> x, double alpha) {
  return test == NormalityTest::shapiro_wilk ? shapiro_wilk(x, alpha) : anderson_darling(x, alpha);
}

std::vector<double> average_ranks(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("spearman: inputs differ in length");
  if (a.size() < 2) throw InvalidArgument("spearman needs at least two pairs");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

}  // namespace difflab
