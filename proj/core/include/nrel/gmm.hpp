#pragma once

#include "nrel/backend.hpp"
#include "nrel/rng.hpp"

namespace nrel {

// Parameters of an isotropic Gaussian-mixture data distribution whose
// time-t marginals (and therefore exact noise predictions) are available in
// closed form. Conditioning reweights the mixture priors through keys:
// component k gets logit <pooled(e), keys[k]>/tau_w + log_priors[k].
struct GMMSpec {
  Mat means;       // K x D component means
  Vec sigmas;      // K isotropic scales (> 0)
  Vec log_priors;  // K prior logits (need not be normalized)
  Mat keys;        // K x d conditioning keys
  double tau_w = 1.0;

  std::size_t components() const { return means.size(); }
  std::size_t data_dim() const { return means.empty() ? 0 : means[0].size(); }
  std::size_t key_dim() const { return keys.empty() ? 0 : keys[0].size(); }

  void validate() const;

  // Checksum of all parameters; used to assert that optimization loops leave
  // the backend untouched.
  double checksum() const;
};

// K components evenly spaced on a circle of the given radius in the first
// two data coordinates, equal priors, shared scale sigma, and keys
// key_scale * e_k (unit axis per component) in a d-dimensional key space.
GMMSpec make_circle_gmm(int K, int D, int d, double radius = 2.0,
                        double sigma = 0.5, double key_scale = 8.0);

// Two components at a common mean whose scales differ (sigma and
// sigma*sibling_ratio), equal priors, keys key_scale*e_0 / key_scale*e_1.
// The sharper sibling extends the radial range of predictions the
// unconditional branch can reach, which per-step null-embedding
// optimization under strong guidance needs.
GMMSpec make_common_mean_gmm(const Vec& mean, double sigma,
                             double sibling_ratio, int d,
                             double key_scale = 8.0);

// Per-dimension average variance of the unconditional mixture (priors
// softmax(log_priors)): (1/D) * (sum_k pi_k*(|mu_k - mean|^2 + D*sigma_k^2)).
// Reconstruction-error bounds are phrased relative to this scale.
double data_variance(const GMMSpec& spec);

class GmmBackend : public DenoiserBackend {
 public:
  explicit GmmBackend(GMMSpec spec);

  const GMMSpec& spec() const { return spec_; }

  Vec eval(const Vec& z, int t, const Embedding& e,
           const NoiseSchedule& sched) const override;
  Mat eval_grad_e(const Vec& z, int t, const Embedding& e,
                  const NoiseSchedule& sched,
                  const Vec& upstream) const override;
  bool supports_embedding_grads() const override { return true; }
  int data_dim() const override {
    return static_cast<int>(spec_.data_dim());
  }

  // Exact conditional log-density of a clean data point.
  double alignment(const Vec& x, const Embedding& e,
                   const NoiseSchedule& sched) const override;
  const char* alignment_surrogate_name() const override {
    return "conditional-log-density";
  }

  // Conditioned prior weights softmax(<pooled, u_k>/tau_w + log pi_k).
  Vec cond_weights(const Embedding& e) const;

  // Posterior component weights at (z, t) under conditioning e.
  Vec responsibilities(const Vec& z, int t, const Embedding& e,
                       const NoiseSchedule& sched) const;

  // Seeded draw from the conditional clean-data distribution.
  Vec sample_data(const Embedding& e, Rng& rng) const;

 private:
  GMMSpec spec_;
};

}  // namespace nrel
