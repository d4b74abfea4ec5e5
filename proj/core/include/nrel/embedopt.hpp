#pragma once

#include <cstdint>

#include "nrel/backend.hpp"
#include "nrel/embedding.hpp"
#include "nrel/net.hpp"
#include "nrel/schedule.hpp"

namespace nrel {

// Outcome of target-embedding optimization: the optimized embedding plus the
// per-iteration loss trace and the exact settings that produced it.
struct OptimizationReport {
  Embedding e_opt;
  Vec loss_curve;  // one entry per iteration, evaluated before each update
  int iterations = 0;
  std::uint64_t seed = 0;
  double lr = 0.0;
};

// Starting from e_tgt, runs `iterations` Adam updates of the noise-prediction
// objective with the model frozen: each iteration draws t ~ Uniform{1..T} and
// eps ~ N(0, I) (a `batch`-sized average of draws when batch > 1), forms
// z_t = forward_diffuse(x_input, t, eps), and descends
// ||eps - eval(z_t, t, e)||^2 with gradients flowing only into the token
// rows of e. Requires a gradient-capable backend.
OptimizationReport optimize_embedding(const Vec& x_input,
                                      const Embedding& e_tgt,
                                      const DenoiserBackend& backend,
                                      const NoiseSchedule& sched,
                                      int iterations, double lr,
                                      std::uint64_t seed, int batch = 1);

// alpha * e_tgt + (1 - alpha) * e_opt elementwise. alpha = 0 and alpha = 1
// return the endpoints exactly; values outside [0, 1] extrapolate and are
// the caller's to flag.
Embedding interpolate(const Embedding& e_tgt, const Embedding& e_opt,
                      double alpha);

struct FinetuneResult {
  DenoiserNet net;  // a new snapshot; the input backend is untouched
  Vec loss_curve;
};

// Model-finetuning baseline: the same noise-prediction objective on the
// single input, with the embedding frozen and gradients flowing into the
// network parameters instead. Only the trainable backend supports this; the
// analytic one has no parameters and raises UnsupportedBackendError.
FinetuneResult imagic_finetune(const DenoiserBackend& backend,
                               const Vec& x_input, const Embedding& e_opt,
                               const NoiseSchedule& sched, int iterations,
                               double lr, std::uint64_t seed);

}  // namespace nrel
