#pragma once

#include <vector>

#include "nrel/vec.hpp"

namespace nrel {

enum class ScheduleKind { Linear };

// Per-timestep cumulative signal fractions alpha_bar[t] (the forward process
// keeps sqrt(alpha_bar[t]) of the signal at timestep t) plus the per-step
// noise increments betas that generate them. alpha_bar[0] = 1 and the
// sequence is strictly decreasing; index t runs 0..T.
struct NoiseSchedule {
  int T = 0;
  std::vector<double> betas;      // betas[0] unused (= 0); betas[1..T]
  std::vector<double> alpha_bar;  // alpha_bar[0..T]
};

// Linear betas from 1e-4 to 2e-2 inclusive across T steps. T >= 2 required.
NoiseSchedule make_schedule(int T, ScheduleKind kind = ScheduleKind::Linear);

// sqrt(alpha_bar[t])*z0 + sqrt(1 - alpha_bar[t])*eps. Accepts t = 0
// (identity in the signal term).
Vec forward_diffuse(const Vec& z0, int t, const Vec& eps,
                    const NoiseSchedule& sched);

// One deterministic sampling update t -> t_prev (t > t_prev >= 0):
//   x0_hat = (z_t - sqrt(1-a_t)*eps_hat)/sqrt(a_t)
//   result = sqrt(a_prev)*x0_hat + sqrt(1-a_prev)*eps_hat
Vec ddim_step(const Vec& z_t, const Vec& eps_hat, int t, int t_prev,
              const NoiseSchedule& sched);

// One inversion update t -> t_next (t_next > t):
//   sqrt(a_next/a_t)*z_t + sqrt(a_next)*(sqrt(1/a_next - 1) - sqrt(1/a_t - 1))*eps_hat
// For a fixed eps_hat this is the exact algebraic inverse of ddim_step with
// swapped timesteps.
Vec invert_step(const Vec& z_t, const Vec& eps_hat, int t, int t_next,
                const NoiseSchedule& sched);

// eps_uncond + w*(eps_cond - eps_uncond). w = 1 returns eps_cond bitwise and
// w = 0 returns eps_uncond bitwise.
Vec cfg_combine(const Vec& eps_uncond, const Vec& eps_cond, double w);

// Evenly spaced sampling timesteps t_i = round(i*T/S), i = S..1, descending;
// the final sampling step targets t = 0.
struct StepPlan {
  int steps = 0;
  std::vector<int> timesteps;  // length steps, strictly decreasing
};

StepPlan make_plan(int S, const NoiseSchedule& sched);

}  // namespace nrel
