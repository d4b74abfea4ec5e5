#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrel/backend.hpp"
#include "nrel/csvio.hpp"
#include "nrel/embedding.hpp"
#include "nrel/embedopt.hpp"
#include "nrel/inversion.hpp"
#include "nrel/schedule.hpp"

namespace nrel {

// Settings for one edit: the embedding interpolation ratio alpha, the
// source-injection ratio rho (fraction of initial sampling steps conditioned
// on the source embedding), step count, guidance scale, inversion kind, the
// embedding-optimization budget, and the seed driving every stochastic draw.
// The trailing knobs cover constants the contract leaves open.
struct EditConfig {
  double alpha = 0.9;
  double rho = 0.2;
  int steps = 50;
  double guidance = 2.0;
  InversionKind inversion_kind = InversionKind::Ddim;
  int opt_iterations = 200;
  std::uint64_t seed = 0;

  double opt_lr = 0.0;  // 0 = per-backend default: 1e-2 analytic, 1e-3 net
  int opt_batch = 1;
  int nti_inner_steps = 10;
  double nti_lr = 1e-2;

  void validate() const;  // 0 <= rho <= 1, steps >= 1, guidance >= 0, ...
};

// One edit with full provenance: the output point, the sampling trajectory
// (embeddings_used records the per-step conditioning labels), the stage
// intermediates, and the filled metrics row. Sweep cells that raised an
// error instead carry failed = true plus the stage-labeled message.
struct EditResult {
  Vec x_edit;
  Trajectory trajectory;
  EditConfig config;
  MetricsRow metrics;
  Embedding e_opt;
  Embedding e_int;
  InversionResult inversion;
  bool failed = false;
  std::string error;
};

// Per-step conditioning under the timestep-split injection rule: the first
// k = round(rho * steps) sampling steps (ties round up; the highest
// timesteps) point at e_src, the remaining steps at e_int. The returned
// pointers alias the arguments and stay valid only while they live.
std::vector<const Embedding*> embedding_schedule(const Embedding& e_src,
                                                 const Embedding& e_int,
                                                 double rho,
                                                 const StepPlan& plan);

// The full three-stage edit: (1) optimize the target embedding against the
// input, (2) invert the input under the source embedding per
// cfg.inversion_kind, (3) interpolate e_int = alpha*e_tgt + (1-alpha)*e_opt
// and sample from the inverted latent under guidance with the injection
// schedule. Errors are rethrown with their stage named. The metrics row is
// filled on return; its runtime field is the backend-evaluation work proxy
// (evaluations / 1000), which keeps output byte-deterministic.
EditResult edit(const Vec& x_input, const std::vector<std::string>& src_prompt,
                const std::vector<std::string>& tgt_prompt,
                const PromptVocabulary& vocab, const DenoiserBackend& backend,
                const NoiseSchedule& sched, const EditConfig& cfg);

// Cartesian (alpha, rho, seed) grid of edits sharing one embedding
// optimization per seed and one inversion overall (both are alpha- and
// rho-independent; inversion is also seed-independent). Cells are emitted in
// alpha-major, then rho, then seed order. A failing cell is recorded with
// failed = true and the sweep continues; each successful cell's runtime
// charges its own sampling plus the shared stages it consumed, so a 1x1x1
// sweep reproduces the single edit call exactly.
std::vector<EditResult> sweep(const Vec& x_input,
                              const std::vector<std::string>& src_prompt,
                              const std::vector<std::string>& tgt_prompt,
                              const PromptVocabulary& vocab,
                              const DenoiserBackend& backend,
                              const NoiseSchedule& sched,
                              const std::vector<double>& alphas,
                              const std::vector<double>& rhos,
                              const std::vector<std::uint64_t>& seeds,
                              const EditConfig& base_cfg);

// The model-finetuning baseline recipe: optimize the target embedding, copy
// the network and finetune it on the single input with the embedding frozen,
// then sample from fresh Gaussian noise with e_int — no inversion and no
// source injection. Sub-seeds: cfg.seed for optimization, +1 for finetuning,
// +2 for the fresh noise draw. Metrics are scored against the original
// (pre-finetune) model so values stay comparable across pipelines. Requires
// the trainable backend.
EditResult imagic_pipeline(const Vec& x_input,
                           const std::vector<std::string>& src_prompt,
                           const std::vector<std::string>& tgt_prompt,
                           const PromptVocabulary& vocab,
                           const DenoiserBackend& backend,
                           const NoiseSchedule& sched, const EditConfig& cfg,
                           int finetune_iterations);

}  // namespace nrel
