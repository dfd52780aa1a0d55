// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#include "difflab/schedule.hpp"

#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>

#include "difflab/errors.hpp"

namespace difflab {

std::string to_string(ScheduleKind kind) { return kind == ScheduleKind::linear ? "linear" : "cosine"; }

ScheduleKind parse_schedule_kind(const std::string& s) {
  if (s == "linear") return ScheduleKind::linear;
  if (s == "cosine") return ScheduleKind::cosine;
  throw InvalidArgument("unknown schedule kind '" + s + "'");
}

NoiseSchedule::NoiseSchedule(ScheduleKind kind, std::vector<double> betas) : kind_(kind), betas_(std::move(betas)) {
  if (betas_.empty()) throw InvalidArgument("schedule needs at least one step");
  const std::size_t T = betas_.size();
  alphas_.resize(T);
  alpha_bars_.resize(T);
  posterior_vars_.resize(T);
  double prev_bar = 1.0;
  for (std::size_t i = 0; i < T; ++i) {
    const double b = betas_[i];
    if (!(b > 0.0 && b < 1.0))
      throw InvalidArgument("beta_" + std::to_string(i + 1) + " = " + std::to_string(b) + " outside (0,1)");
    alphas_[i] = 1.0 - b;
    alpha_bars_[i] = prev_bar * alphas_[i];
    posterior_vars_[i] = (1.0 - prev_bar) / (1.0 - alpha_bars_[i]) * b;
    prev_bar = alpha_bars_[i];
  }
}

void NoiseSchedule::check_step(int t) const {
  if (t < 1 || t > steps())
    throw InvalidArgument("step " + std::to_string(t) + " outside 1.." + std::to_string(steps()));
}

void NoiseSchedule::write_table(std::ostream& os) const {
  os << "# kind=" << to_string(kind_) << " T=" << steps() << "\n# t beta alpha_bar posterior_variance\n";
  os << std::setprecision(17);
  for (int t = 1; t <= steps(); ++t)
    os << t << ' ' << beta(t) << ' ' << alpha_bar(t) << ' ' << posterior_variance(t) << '\n';
}

NoiseSchedule make_linear_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw InvalidArgument("linear schedule needs T >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw InvalidArgument("linear schedule needs 0 < beta_start <= beta_end < 1");
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    betas[static_cast<std::size_t>(t - 1)] =
        T == 1 ? beta_start : beta_start + static_cast<double>(t - 1) / (T - 1) * (beta_end - beta_start);
  }
  return NoiseSchedule(ScheduleKind::linear, std::move(betas));
}

NoiseSchedule make_cosine_schedule(int T, double offset, double beta_clip) {
  if (T < 1) throw InvalidArgument("cosine schedule needs T >= 1");
  if (!(offset >= 0.0) || !(beta_clip > 0.0 && beta_clip < 1.0))
    throw InvalidArgument("cosine schedule needs offset >= 0 and beta_clip in (0,1)");
  auto f = [&](double t) {
    const double c = std::cos((t / T + offset) / (1.0 + offset) * std::numbers::pi / 2.0);
    return c * c;
  };
  const double f0 = f(0.0);
  std::vector<double> betas(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const double ratio = (f(t) / f0) / (f(t - 1) / f0);
    betas[static_cast<std::size_t>(t - 1)] = std::min(1.0 - ratio, beta_clip);
  }
  return NoiseSchedule(ScheduleKind::cosine, std::move(betas));
}

RespacedSchedule::RespacedSchedule(NoiseSchedule parent, std::vector<int> steps)
    : parent_(std::move(parent)), steps_(std::move(steps)) {
  if (steps_.empty()) throw InvalidArgument("respaced schedule needs at least one step");
  int prev = 0;
  for (int s : steps_) {
    if (s <= prev || s > parent_.steps()) throw InvalidArgument("respaced steps must increase strictly within 1..T");
    const double bar = parent_.alpha_bar(s);
    const double prev_bar = parent_.alpha_bar(prev);
    double alpha, beta;
    if (s == prev + 1) {
      alpha = parent_.alpha(s);
      beta = parent_.beta(s);
    } else {
      alpha = bar / prev_bar;
      beta = 1.0 - alpha;
    }
    betas_.push_back(beta);
    alphas_.push_back(alpha);
    alpha_bars_.push_back(bar);
    posterior_vars_.push_back(s == prev + 1 ? parent_.posterior_variance(s) : (1.0 - prev_bar) / (1.0 - bar) * beta);
    prev = s;
  }
}

NoiseSchedule RespacedSchedule::as_schedule() const { return NoiseSchedule(parent_.kind(), betas_); }

std::vector<int> respaced_steps(int T, int T_prime) {
  if (T_prime < 1 || T_prime > T)
    throw InvalidArgument("respacing needs 1 <= T' <= T (T=" + std::to_string(T) +
                          ", T'=" + std::to_string(T_prime) + ")");
  std::vector<int> steps(static_cast<std::size_t>(T_prime));
  for (int i = 1; i <= T_prime; ++i) {
    const long long offset = static_cast<long long>(T_prime - i) * T / T_prime;
    steps[static_cast<std::size_t>(i - 1)] = T - static_cast<int>(offset);
  }
  return steps;
}

RespacedSchedule respace(const NoiseSchedule& schedule, int T_prime) {
  return RespacedSchedule(schedule, respaced_steps(schedule.steps(), T_prime));
}

}  // namespace difflab

namespace difflab {

NoiseSchedule make_schedule(const ScheduleSpec& spec) {
  return spec.kind == ScheduleKind::linear ? make_linear_schedule(spec.steps, spec.beta_start, spec.beta_end)
                                           : make_cosine_schedule(spec.steps, spec.cosine_offset, spec.beta_clip);
}

}  // namespace difflab
