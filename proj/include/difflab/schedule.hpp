// Copyright (C) 2026 The difflab authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace difflab {

enum class ScheduleKind { linear, cosine };

std::string to_string(ScheduleKind kind);
ScheduleKind parse_schedule_kind(const std::string& s);

/// Forward-process coefficient tables, always in double precision.
///
/// Steps are 1-based (t = 1..T) in every accessor; the underlying arrays are
/// 0-based. alpha_bar(0) is defined as exactly 1.
class NoiseSchedule {
 public:
  /// Builds the derived tables from betas; throws InvalidArgument unless every
  /// beta lies in (0, 1).
  NoiseSchedule(ScheduleKind kind, std::vector<double> betas);

  ScheduleKind kind() const { return kind_; }
  int steps() const { return static_cast<int>(betas_.size()); }

  double beta(int t) const { return betas_[index(t)]; }
  double alpha(int t) const { return alphas_[index(t)]; }
  double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bars_[index(t)]; }
  /// sigma_t^2 = (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t
  double posterior_variance(int t) const { return posterior_vars_[index(t)]; }

  std::span<const double> betas() const { return betas_; }
  std::span<const double> alphas() const { return alphas_; }
  std::span<const double> alpha_bars() const { return alpha_bars_; }
  std::span<const double> posterior_variances() const { return posterior_vars_; }

  /// Plain-text table, one row per step: t beta_t alpha_bar_t sigma_t^2.
  void write_table(std::ostream& os) const;

  /// Throws InvalidArgument unless 1 <= t <= T.
  void check_step(int t) const;

  friend bool operator==(const NoiseSchedule&, const NoiseSchedule&) = default;

 private:
  std::size_t index(int t) const { return static_cast<std::size_t>(t - 1); }

  ScheduleKind kind_;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> posterior_vars_;
};

NoiseSchedule make_linear_schedule(int T, double beta_start = 1e-4, double beta_end = 0.02);
NoiseSchedule make_cosine_schedule(int T, double offset = 0.008, double beta_clip = 0.999);

/// An evenly strided subsequence of a parent schedule's steps, with the
/// per-step coefficients recomputed so that each jump s_{i-1} -> s_i is a
/// single Gaussian transition.
///
/// Where two selected steps are adjacent in the parent, the parent's beta and
/// alpha are copied verbatim, so respacing to T' = T reproduces the parent
/// tables bit for bit.
class RespacedSchedule {
 public:
  RespacedSchedule(NoiseSchedule parent, std::vector<int> steps);

  const NoiseSchedule& parent() const { return parent_; }
  int size() const { return static_cast<int>(steps_.size()); }
  std::span<const int> steps() const { return steps_; }

  // Per-index coefficients, i = 0..size()-1 (index i corresponds to parent step steps()[i]).
  std::span<const double> effective_betas() const { return betas_; }
  std::span<const double> effective_alphas() const { return alphas_; }
  std::span<const double> effective_alpha_bars() const { return alpha_bars_; }
  std::span<const double> effective_posterior_variances() const { return posterior_vars_; }
  /// alpha_bar at the previous selected step (1 for i = 0).
  double alpha_bar_prev(int i) const { return i == 0 ? 1.0 : alpha_bars_[static_cast<std::size_t>(i - 1)]; }

  /// The respaced chain as a standalone T'-step schedule.
  NoiseSchedule as_schedule() const;

 private:
  NoiseSchedule parent_;
  std::vector<int> steps_;
  std::vector<double> betas_;
  std::vector<double> alphas_;
  std::vector<double> alpha_bars_;
  std::vector<double> posterior_vars_;
};

/// Even-stride selection s_i = T - floor((T' - i) * T / T'), i = 1..T'.
std::vector<int> respaced_steps(int T, int T_prime);
RespacedSchedule respace(const NoiseSchedule& schedule, int T_prime);

}  // namespace difflab

namespace difflab {

/// Declarative schedule description (config files, checkpoint manifests).
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::linear;
  int steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
  double cosine_offset = 0.008;
  double beta_clip = 0.999;

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

NoiseSchedule make_schedule(const ScheduleSpec& spec);

}  // namespace difflab
