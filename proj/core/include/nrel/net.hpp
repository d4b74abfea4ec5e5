#pragma once

#include <cstdint>

#include "nrel/backend.hpp"

namespace nrel {

// A small dense noise-prediction network:
//   input  = concat(z, sinusoidal time features, pooled embedding)
//   hidden = two tanh layers of width H
//   output = linear, dimension D
// Parameters live in one flat vector (layout W1,b1,W2,b2,W3,b3, row-major)
// so one optimizer state covers the whole model.
struct DenoiserNet {
  int D = 0;  // data dimension
  int H = 0;  // hidden width
  int F = 0;  // sinusoidal frequency pairs (2F time features)
  int d = 0;  // embedding dimension
  Vec params;

  int input_dim() const { return D + 2 * F + d; }
  std::size_t param_count() const {
    const std::size_t in = static_cast<std::size_t>(input_dim());
    const std::size_t h = static_cast<std::size_t>(H);
    const std::size_t out = static_cast<std::size_t>(D);
    return h * in + h + h * h + h + out * h + out;
  }
};

// Seeded initialization: each layer's weights and biases drawn uniformly
// from (-1/sqrt(fan_in), +1/sqrt(fan_in)). Keeps fresh-net outputs O(1).
DenoiserNet make_net(int D, int H, int F, int d, std::uint64_t seed);

// [sin(w_i*t), cos(w_i*t)] for w_i = 10000^(-i/F), i = 0..F-1.
Vec time_encoding(int t, int F);

class NetBackend : public DenoiserBackend {
 public:
  explicit NetBackend(DenoiserNet net);

  const DenoiserNet& net() const { return net_; }
  DenoiserNet& net() { return net_; }

  Vec eval(const Vec& z, int t, const Embedding& e,
           const NoiseSchedule& sched) const override;
  Mat eval_grad_e(const Vec& z, int t, const Embedding& e,
                  const NoiseSchedule& sched,
                  const Vec& upstream) const override;
  bool supports_embedding_grads() const override { return true; }
  int data_dim() const override { return net_.D; }

  // Negative Monte-Carlo noise-prediction loss over a fixed seeded set of
  // (t, eps) draws: deterministic for a given model snapshot, higher =
  // better aligned.
  double alignment(const Vec& x, const Embedding& e,
                   const NoiseSchedule& sched) const override;
  const char* alignment_surrogate_name() const override {
    return "negative-noise-prediction-loss";
  }

  struct Grads {
    Vec params;  // same layout as DenoiserNet::params
    Mat emb;     // N x d token-matrix gradient
  };

  // Reverse-mode gradients of <upstream, eval(z,t,e)> with respect to all
  // parameters and the embedding.
  Grads grads(const Vec& z, int t, const Embedding& e,
              const Vec& upstream) const;

  static constexpr int kAlignmentDraws = 64;
  static constexpr std::uint64_t kAlignmentSeed = 0xA11C;

 private:
  DenoiserNet net_;
};

}  // namespace nrel
