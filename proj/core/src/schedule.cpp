#include "nrel/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace nrel {

NoiseSchedule make_schedule(int T, ScheduleKind kind) {
  if (T < 2) throw std::invalid_argument("make_schedule: T must be >= 2");
  if (kind != ScheduleKind::Linear) {
    throw std::invalid_argument("make_schedule: unknown schedule kind");
  }
  constexpr double kBetaLo = 1e-4;
  constexpr double kBetaHi = 2e-2;
  NoiseSchedule s;
  s.T = T;
  s.betas.assign(static_cast<std::size_t>(T) + 1, 0.0);
  s.alpha_bar.assign(static_cast<std::size_t>(T) + 1, 1.0);
  for (int t = 1; t <= T; ++t) {
    s.betas[t] = kBetaLo + (static_cast<double>(t - 1)) * (kBetaHi - kBetaLo) /
                               static_cast<double>(T - 1);
    s.alpha_bar[t] = s.alpha_bar[t - 1] * (1.0 - s.betas[t]);
  }
  return s;
}

static void check_timestep(int t, const NoiseSchedule& sched, const char* op) {
  if (t < 0 || t > sched.T) {
    throw std::invalid_argument(std::string(op) + ": timestep out of range");
  }
}

Vec forward_diffuse(const Vec& z0, int t, const Vec& eps,
                    const NoiseSchedule& sched) {
  require_same_dim(z0, eps, "forward_diffuse");
  check_timestep(t, sched, "forward_diffuse");
  const double a = sched.alpha_bar[t];
  const double sa = std::sqrt(a);
  const double sv = std::sqrt(1.0 - a);
  Vec out(z0.size());
  for (std::size_t i = 0; i < z0.size(); ++i) out[i] = sa * z0[i] + sv * eps[i];
  return out;
}

Vec ddim_step(const Vec& z_t, const Vec& eps_hat, int t, int t_prev,
              const NoiseSchedule& sched) {
  require_same_dim(z_t, eps_hat, "ddim_step");
  check_timestep(t, sched, "ddim_step");
  check_timestep(t_prev, sched, "ddim_step");
  if (t_prev >= t) throw std::invalid_argument("ddim_step: requires t > t_prev");
  const double at = sched.alpha_bar[t];
  const double ap = sched.alpha_bar[t_prev];
  const double sat = std::sqrt(at);
  const double svt = std::sqrt(1.0 - at);
  const double sap = std::sqrt(ap);
  const double svp = std::sqrt(1.0 - ap);
  Vec out(z_t.size());
  for (std::size_t i = 0; i < z_t.size(); ++i) {
    const double x0 = (z_t[i] - svt * eps_hat[i]) / sat;
    out[i] = sap * x0 + svp * eps_hat[i];
  }
  return out;
}

Vec invert_step(const Vec& z_t, const Vec& eps_hat, int t, int t_next,
                const NoiseSchedule& sched) {
  require_same_dim(z_t, eps_hat, "invert_step");
  check_timestep(t, sched, "invert_step");
  check_timestep(t_next, sched, "invert_step");
  if (t_next <= t) {
    throw std::invalid_argument("invert_step: requires t_next > t");
  }
  const double at = sched.alpha_bar[t];
  const double an = sched.alpha_bar[t_next];
  const double ratio = std::sqrt(an / at);
  const double coef =
      std::sqrt(an) * (std::sqrt(1.0 / an - 1.0) - std::sqrt(1.0 / at - 1.0));
  Vec out(z_t.size());
  for (std::size_t i = 0; i < z_t.size(); ++i) {
    out[i] = ratio * z_t[i] + coef * eps_hat[i];
  }
  return out;
}

Vec cfg_combine(const Vec& eps_uncond, const Vec& eps_cond, double w) {
  require_same_dim(eps_uncond, eps_cond, "cfg_combine");
  if (!std::isfinite(w) || w < 0.0) {
    throw std::invalid_argument("cfg_combine: w must be finite and >= 0");
  }
  // Exact at the two degenerate scales; the generic expression would leave
  // round-off in a + w*(b - a).
  if (w == 1.0) return eps_cond;
  if (w == 0.0) return eps_uncond;
  Vec out(eps_uncond.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = eps_uncond[i] + w * (eps_cond[i] - eps_uncond[i]);
  }
  return out;
}

StepPlan make_plan(int S, const NoiseSchedule& sched) {
  if (S < 1) throw std::invalid_argument("make_plan: S must be >= 1");
  if (S > sched.T) throw std::invalid_argument("make_plan: S must be <= T");
  StepPlan plan;
  plan.steps = S;
  plan.timesteps.reserve(S);
  for (int i = S; i >= 1; --i) {
    const double raw = static_cast<double>(i) * static_cast<double>(sched.T) /
                       static_cast<double>(S);
    int t = static_cast<int>(std::lround(raw));
    if (t < 1) t = 1;
    if (t > sched.T) t = sched.T;
    plan.timesteps.push_back(t);
  }
  // Uniform rounding can only collide for S close to T; guard anyway.
  for (std::size_t i = 1; i < plan.timesteps.size(); ++i) {
    if (plan.timesteps[i] >= plan.timesteps[i - 1]) {
      throw std::invalid_argument("make_plan: timesteps not strictly decreasing");
    }
  }
  return plan;
}

}  // namespace nrel
