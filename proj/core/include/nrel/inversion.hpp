#pragma once

#include <string>
#include <vector>

#include "nrel/backend.hpp"
#include "nrel/embedding.hpp"
#include "nrel/schedule.hpp"
#include "nrel/vec.hpp"

namespace nrel {

// Ordered latent states (z, t) across a sampling or inversion run, plus a
// label naming the conditioning used at each step. states has one more entry
// than steps; timesteps are strictly monotone in the declared direction.
struct LatentState {
  Vec z;
  int t = 0;
};

enum class TrajectoryDirection { Sampling, Inversion };

struct Trajectory {
  TrajectoryDirection direction = TrajectoryDirection::Sampling;
  std::vector<LatentState> states;
  std::vector<std::string> embeddings_used;  // one label per step
};

enum class InversionKind { Ddim, NullText };

// The inverted-latent bundle: the terminal latent, the pivot trajectory
// z*_t in ascending t starting at the input z_0, and (for the null-text
// kind) one optimized null embedding per sampling step together with the
// squared distance between each replayed step output and its pivot state.
struct InversionResult {
  Vec z_T_star;
  Trajectory pivot;
  InversionKind kind = InversionKind::Ddim;
  std::vector<Embedding> null_embeddings;  // present iff kind == NullText
  Vec per_step_pivot_error;                // squared distances, >= 0
};

// Deterministic inversion along the reversed step plan with the conditional
// prediction only (no guidance): each update applies invert_step with
// eps_hat evaluated at the current latent and timestep under e_src.
// Pivot errors are all zero for this kind. A latent that goes non-finite or
// exceeds norm 1e6 raises NumericDivergenceError naming the step.
InversionResult ddim_invert(const Vec& z0, const Embedding& e_src,
                            const DenoiserBackend& backend,
                            const NoiseSchedule& sched, const StepPlan& plan);

// Pivot inversion (as ddim_invert), then a guided replay from z*_T that
// optimizes one null embedding per sampling step so the guided step output
// tracks the pivot: at each step the squared distance between the CFG step
// result and the pivot state is minimized with Adam over the null embedding
// (warm-started from the previous step, the first from the zero embedding)
// for at most inner_steps iterations, stopping early once the squared
// residual falls to 1e-5 or below. Requires w >= 1 and a gradient-capable
// backend.
InversionResult null_text_invert(const Vec& z0, const Embedding& e_src,
                                 const DenoiserBackend& backend,
                                 const NoiseSchedule& sched,
                                 const StepPlan& plan, double w,
                                 int inner_steps, double lr);

struct SamplingOutput {
  Vec x0;
  Trajectory trajectory;
};

// Shared guided-sampling core: walks the plan from z_start, conditioning
// step i on *cond[i] (labelled cond_labels[i] in the trajectory). The
// unconditional branch uses *uncond[i] when provided, the zero embedding
// when uncond is empty. w == 1 skips the unconditional evaluation and uses
// the conditional prediction bitwise. Applies the same divergence guard as
// inversion.
SamplingOutput cfg_sample(const Vec& z_start,
                          const std::vector<const Embedding*>& cond,
                          const std::vector<std::string>& cond_labels,
                          const std::vector<const Embedding*>& uncond,
                          const DenoiserBackend& backend,
                          const NoiseSchedule& sched, const StepPlan& plan,
                          double w);

// DDIM-samples from inv.z_T_star under guidance w conditioned on e, using
// the stored per-step null embeddings when inv.kind is NullText (the zero
// embedding otherwise). The plan must match the stored trajectory.
SamplingOutput reconstruct(const InversionResult& inv, const Embedding& e,
                           const DenoiserBackend& backend,
                           const NoiseSchedule& sched, const StepPlan& plan,
                           double w);

}  // namespace nrel
