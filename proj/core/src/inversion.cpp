#include "nrel/inversion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "nrel/adam.hpp"
#include "nrel/errors.hpp"

namespace nrel {

namespace {

constexpr double kDivergenceNormGuard = 1e6;
constexpr double kInnerStopSq = 1e-5;

void guard_latent(const Vec& z, const char* where, int step_index, int t) {
  if (!all_finite(z) || norm(z) > kDivergenceNormGuard) {
    throw NumericDivergenceError(std::string(where) +
                                 ": latent diverged at step " +
                                 std::to_string(step_index) + " (t=" +
                                 std::to_string(t) + ")");
  }
}

// Coefficient of eps_hat in ddim_step from t to t_prev; the update is linear
// in the prediction, so this single scalar carries the whole Jacobian.
double ddim_eps_coefficient(int t, int t_prev, const NoiseSchedule& sched) {
  const double a_t = sched.alpha_bar[static_cast<std::size_t>(t)];
  const double a_p = sched.alpha_bar[static_cast<std::size_t>(t_prev)];
  return std::sqrt(1.0 - a_p) - std::sqrt(a_p / a_t) * std::sqrt(1.0 - a_t);
}

}  // namespace

InversionResult ddim_invert(const Vec& z0, const Embedding& e_src,
                            const DenoiserBackend& backend,
                            const NoiseSchedule& sched, const StepPlan& plan) {
  if (!all_finite(z0)) {
    throw std::invalid_argument("ddim_invert: non-finite input");
  }
  InversionResult out;
  out.kind = InversionKind::Ddim;
  out.pivot.direction = TrajectoryDirection::Inversion;
  out.pivot.states.push_back({z0, 0});
  Vec cur = z0;
  int t_from = 0;
  for (int i = plan.steps - 1; i >= 0; --i) {
    const int t_to = plan.timesteps[static_cast<std::size_t>(i)];
    const Vec eps_hat = backend.eval(cur, t_from, e_src, sched);
    cur = invert_step(cur, eps_hat, t_from, t_to, sched);
    guard_latent(cur, "ddim_invert", plan.steps - 1 - i, t_to);
    out.pivot.states.push_back({cur, t_to});
    out.pivot.embeddings_used.push_back("e_src");
    t_from = t_to;
  }
  out.z_T_star = cur;
  out.per_step_pivot_error.assign(static_cast<std::size_t>(plan.steps), 0.0);
  return out;
}

InversionResult null_text_invert(const Vec& z0, const Embedding& e_src,
                                 const DenoiserBackend& backend,
                                 const NoiseSchedule& sched,
                                 const StepPlan& plan, double w,
                                 int inner_steps, double lr) {
  if (!(w >= 1.0) || !std::isfinite(w)) {
    throw std::invalid_argument("null_text_invert: guidance must be >= 1");
  }
  if (inner_steps < 0) {
    throw std::invalid_argument("null_text_invert: negative inner_steps");
  }
  if (!backend.supports_embedding_grads()) {
    throw UnsupportedBackendError(
        "null_text_invert: backend does not support embedding gradients");
  }

  InversionResult out = ddim_invert(z0, e_src, backend, sched, plan);
  out.kind = InversionKind::NullText;
  out.per_step_pivot_error.clear();
  out.null_embeddings.clear();
  out.null_embeddings.reserve(static_cast<std::size_t>(plan.steps));

  const std::size_t d = e_src.dim();
  Embedding null_emb = Embedding::zero(1, d);
  Vec cur = out.z_T_star;
  const int S = plan.steps;
  for (int i = 0; i < S; ++i) {
    const int t = plan.timesteps[static_cast<std::size_t>(i)];
    const int t_prev =
        (i + 1 < S) ? plan.timesteps[static_cast<std::size_t>(i + 1)] : 0;
    const Vec& target = out.pivot.states[static_cast<std::size_t>(S - 1 - i)].z;
    const Vec eps_cond = backend.eval(cur, t, e_src, sched);
    const double coeff = ddim_eps_coefficient(t, t_prev, sched);

    auto guided_step = [&](const Embedding& ne) -> Vec {
      const Vec eps_uncond = backend.eval(cur, t, ne, sched);
      return ddim_step(cur, cfg_combine(eps_uncond, eps_cond, w), t, t_prev,
                       sched);
    };

    Adam opt(d);
    Vec stepped = guided_step(null_emb);
    double sq = sq_norm(sub(stepped, target));
    int j = 0;
    while (j < inner_steps && sq > kInnerStopSq) {
      const Vec upstream =
          scaled(sub(stepped, target), 2.0 * coeff * (1.0 - w));
      const Mat grad = backend.eval_grad_e(cur, t, null_emb, sched, upstream);
      opt.step(null_emb.tokens[0], grad[0], lr);
      null_emb.repool();
      stepped = guided_step(null_emb);
      sq = sq_norm(sub(stepped, target));
      ++j;
    }

    out.per_step_pivot_error.push_back(sq);
    out.null_embeddings.push_back(null_emb);
    cur = stepped;
    guard_latent(cur, "null_text_invert", i, t_prev);
  }
  return out;
}

SamplingOutput cfg_sample(const Vec& z_start,
                          const std::vector<const Embedding*>& cond,
                          const std::vector<std::string>& cond_labels,
                          const std::vector<const Embedding*>& uncond,
                          const DenoiserBackend& backend,
                          const NoiseSchedule& sched, const StepPlan& plan,
                          double w) {
  const std::size_t steps = static_cast<std::size_t>(plan.steps);
  if (cond.size() != steps) {
    throw std::invalid_argument(
        "cfg_sample: one conditional embedding per step required");
  }
  if (!uncond.empty() && uncond.size() != steps) {
    throw std::invalid_argument(
        "cfg_sample: unconditional embeddings must match the step count");
  }
  if (!cond_labels.empty() && cond_labels.size() != steps) {
    throw std::invalid_argument(
        "cfg_sample: labels must match the step count");
  }
  const Embedding zero_emb = Embedding::zero(1, cond[0]->dim());

  SamplingOutput out;
  out.trajectory.direction = TrajectoryDirection::Sampling;
  out.trajectory.states.push_back({z_start, plan.timesteps[0]});
  Vec cur = z_start;
  for (std::size_t i = 0; i < steps; ++i) {
    const int t = plan.timesteps[i];
    const int t_prev = (i + 1 < steps) ? plan.timesteps[i + 1] : 0;
    const Vec eps_cond = backend.eval(cur, t, *cond[i], sched);
    Vec eps_hat;
    if (w == 1.0) {
      eps_hat = eps_cond;
    } else {
      const Embedding& un = uncond.empty() ? zero_emb : *uncond[i];
      eps_hat = cfg_combine(backend.eval(cur, t, un, sched), eps_cond, w);
    }
    cur = ddim_step(cur, eps_hat, t, t_prev, sched);
    guard_latent(cur, "cfg_sample", static_cast<int>(i), t_prev);
    out.trajectory.states.push_back({cur, t_prev});
    out.trajectory.embeddings_used.push_back(
        cond_labels.empty() ? std::string() : cond_labels[i]);
  }
  out.x0 = cur;
  return out;
}

SamplingOutput reconstruct(const InversionResult& inv, const Embedding& e,
                           const DenoiserBackend& backend,
                           const NoiseSchedule& sched, const StepPlan& plan,
                           double w) {
  const std::size_t steps = static_cast<std::size_t>(plan.steps);
  if (inv.pivot.states.size() != steps + 1) {
    throw std::invalid_argument(
        "reconstruct: plan step count does not match the inversion");
  }
  for (std::size_t i = 0; i < steps; ++i) {
    if (inv.pivot.states[steps - i].t != plan.timesteps[i]) {
      throw std::invalid_argument(
          "reconstruct: plan timesteps do not match the inversion");
    }
  }
  if (inv.kind == InversionKind::NullText &&
      inv.null_embeddings.size() != steps) {
    throw std::invalid_argument(
        "reconstruct: stored null embeddings do not match the plan");
  }

  std::vector<const Embedding*> cond(steps, &e);
  std::vector<std::string> labels(steps, "e");
  std::vector<const Embedding*> uncond;
  if (inv.kind == InversionKind::NullText) {
    uncond.reserve(steps);
    for (const Embedding& ne : inv.null_embeddings) uncond.push_back(&ne);
  }
  return cfg_sample(inv.z_T_star, cond, labels, uncond, backend, sched, plan,
                    w);
}

}  // namespace nrel
