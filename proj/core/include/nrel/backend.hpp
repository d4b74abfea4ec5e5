#pragma once

#include <atomic>
#include <cstdint>

#include "nrel/embedding.hpp"
#include "nrel/schedule.hpp"
#include "nrel/vec.hpp"

namespace nrel {

// A conditional noise predictor f(z_t, t, e). Evaluation is read-only on
// model state and safe to call concurrently; the evaluation counter is the
// only mutable member and is atomic.
class DenoiserBackend {
 public:
  virtual ~DenoiserBackend() = default;

  // Predicted noise for the latent z at timestep t under conditioning e.
  virtual Vec eval(const Vec& z, int t, const Embedding& e,
                   const NoiseSchedule& sched) const = 0;

  virtual bool supports_embedding_grads() const = 0;

  // Vector-Jacobian product: gradient of <upstream, eval(z,t,e)> with respect
  // to the token matrix of e (through the mean pooling), as an N x d matrix.
  // Backends without gradient support throw UnsupportedBackendError.
  virtual Mat eval_grad_e(const Vec& z, int t, const Embedding& e,
                          const NoiseSchedule& sched,
                          const Vec& upstream) const;

  virtual int data_dim() const = 0;

  // Conditional alignment score of a clean data point under prompt embedding
  // e: higher means better aligned. Scale is backend-specific (exact
  // log-density for the analytic backend, a negative noise-prediction loss
  // estimate for the trained one); the CLI manifest records which.
  virtual double alignment(const Vec& x, const Embedding& e,
                           const NoiseSchedule& sched) const = 0;

  virtual const char* alignment_surrogate_name() const = 0;

  // Deterministic work counter: total eval() calls since construction or the
  // last reset. Used as the reproducible runtime proxy in metrics output.
  std::uint64_t eval_count() const {
    return evals_.load(std::memory_order_relaxed);
  }
  void reset_eval_count() const { evals_.store(0, std::memory_order_relaxed); }

 protected:
  void count_eval() const { evals_.fetch_add(1, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> evals_{0};
};

}  // namespace nrel
