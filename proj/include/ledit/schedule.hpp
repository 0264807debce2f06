// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ledit/grid.hpp"

namespace ledit {

/// Timestep index of the fully denoised boundary. The cumulative signal
/// fraction there is defined as exactly 1, so the final update of a sampling
/// plan returns the clean estimate.
inline constexpr int kNoNoiseTimestep = -1;

enum class ScheduleKind { linear_beta, cosine };

/// Discrete diffusion noise schedule: cumulative signal fractions
/// alpha_bar_t in (0,1), strictly decreasing over t = 0..T-1.
struct NoiseSchedule {
  int num_train_timesteps = 0;
  Eigen::VectorXd alpha_bar;

  /// alpha_bar lookup; t == kNoNoiseTimestep yields exactly 1.
  double alpha_bar_at(int t) const {
    if (t == kNoNoiseTimestep) return 1.0;
    if (t < 0 || t >= num_train_timesteps) throw std::invalid_argument("NoiseSchedule: timestep out of range");
    return alpha_bar[t];
  }

  bool valid_timestep(int t) const { return t == kNoNoiseTimestep || (t >= 0 && t < num_train_timesteps); }

  /// Maps a fractional noise level in (0,1] to the integer timestep
  /// round(f * (T-1)).
  int timestep_from_fraction(double fraction) const {
    if (!(fraction > 0.0) || fraction > 1.0)
      throw std::invalid_argument("NoiseSchedule: noise fraction must be in (0,1]");
    return static_cast<int>(std::llround(fraction * (num_train_timesteps - 1)));
  }
};

/// Strictly decreasing timesteps visited by a DDIM sampling run. The implicit
/// successor of the last step is kNoNoiseTimestep.
struct TimestepPlan {
  std::vector<int> steps;
  double start_fraction = 1.0;

  int step_after(std::size_t k) const {
    return (k + 1 < steps.size()) ? steps[k + 1] : kNoNoiseTimestep;
  }
};

inline NoiseSchedule make_schedule(ScheduleKind kind, int num_train_timesteps) {
  if (num_train_timesteps < 2) throw std::invalid_argument("make_schedule: need at least 2 timesteps");
  const int T = num_train_timesteps;
  NoiseSchedule sched;
  sched.num_train_timesteps = T;
  sched.alpha_bar.resize(T);

  if (kind == ScheduleKind::linear_beta) {
    // betas linearly spaced over [1e-4, 2e-2]; alpha_bar_t = prod(1 - beta_s).
    const double beta_lo = 1e-4, beta_hi = 2e-2;
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
      const double beta = beta_lo + (beta_hi - beta_lo) * static_cast<double>(t) / (T - 1);
      prod *= 1.0 - beta;
      sched.alpha_bar[t] = prod;
    }
  } else {
    // Squared-cosine profile; betas taken from consecutive ratios and capped,
    // which keeps alpha_bar_0 strictly below 1.
    const auto f = [T](double t) {
      const double x = (t / T + 0.008) / 1.008 * M_PI / 2.0;
      return std::cos(x) * std::cos(x);
    };
    double prod = 1.0;
    for (int t = 0; t < T; ++t) {
      const double beta = std::min(1.0 - f(t + 1.0) / f(static_cast<double>(t)), 0.999);
      prod *= 1.0 - beta;
      sched.alpha_bar[t] = prod;
    }
  }
  return sched;
}

/// Forward noising: sqrt(ab_t) * x0 + sqrt(1 - ab_t) * eps, elementwise.
template <typename Scalar>
GridT<Scalar> add_noise(const GridT<Scalar>& x0, const GridT<Scalar>& eps, int t,
                        const NoiseSchedule& sched) {
  require_same_shape(x0, eps, "add_noise");
  const double ab = sched.alpha_bar_at(t);
  GridT<Scalar> out = x0;
  out.data = std::sqrt(ab) * x0.data + std::sqrt(1.0 - ab) * eps.data;
  return out;
}

/// Evenly spaced decreasing timesteps from round(start_fraction*(T-1)) toward
/// 0. Throws if the schedule cannot supply num_steps distinct timesteps.
inline TimestepPlan make_plan(const NoiseSchedule& sched, int num_steps, double start_fraction) {
  const int T = sched.num_train_timesteps;
  if (num_steps < 1 || num_steps > T) throw std::invalid_argument("make_plan: num_steps out of range");
  if (!(start_fraction > 0.0) || start_fraction > 1.0)
    throw std::invalid_argument("make_plan: start_fraction must be in (0,1]");

  const int first = sched.timestep_from_fraction(start_fraction);
  if (num_steps > first + 1)
    throw std::invalid_argument("make_plan: not enough distinct timesteps below the start");

  TimestepPlan plan;
  plan.start_fraction = start_fraction;
  plan.steps.reserve(num_steps);
  if (num_steps == 1) {
    plan.steps.push_back(first);
    return plan;
  }
  int prev = -1;
  for (int k = 0; k < num_steps; ++k) {
    const double pos = static_cast<double>(first) * (1.0 - static_cast<double>(k) / (num_steps - 1));
    int s = static_cast<int>(std::llround(pos));
    if (prev >= 0 && s >= prev) s = prev - 1;  // enforce strict decrease when rounding collides
    if (s < 0) throw std::invalid_argument("make_plan: not enough distinct timesteps below the start");
    plan.steps.push_back(s);
    prev = s;
  }
  return plan;
}

}  // namespace ledit
