#include "nrel/train.hpp"

#include <stdexcept>
#include <string>

#include "nrel/adam.hpp"
#include "nrel/errors.hpp"
#include "nrel/rng.hpp"

namespace nrel {

Vec train_denoiser(NetBackend& backend, const Dataset& data,
                   PromptVocabulary& vocab, const NoiseSchedule& sched,
                   int epochs, double lr, std::uint64_t seed) {
  if (data.points.empty()) {
    throw std::invalid_argument("train_denoiser: empty dataset");
  }
  if (epochs < 0) {
    throw std::invalid_argument("train_denoiser: negative epochs");
  }
  const std::size_t count = data.points.size();
  std::vector<int> token_index(count);
  for (std::size_t i = 0; i < count; ++i) {
    const int idx = vocab.find(data.labels[i]);
    if (idx < 0) throw UnknownTokenError(data.labels[i]);
    token_index[i] = idx;
  }

  Rng rng(seed);
  Adam param_opt(backend.net().params.size());
  std::vector<Adam> row_opt;
  row_opt.reserve(vocab.tokens.size());
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i) {
    row_opt.emplace_back(vocab.dim());
  }

  Vec curve;
  curve.reserve(static_cast<std::size_t>(epochs));
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      const int t = 1 + static_cast<int>(rng.uniform_int(
                            static_cast<std::uint64_t>(sched.T)));
      const Vec eps = rng.normal_vec(data.points[i].size());
      const Vec z_t = forward_diffuse(data.points[i], t, eps, sched);
      const int idx = token_index[i];
      Embedding e = Embedding::from_rows({vocab.table[idx]});
      const Vec pred = backend.eval(z_t, t, e, sched);
      Vec residual = sub(pred, eps);
      total += sq_norm(residual);
      const Vec upstream = scaled(residual, 2.0);
      const NetBackend::Grads g = backend.grads(z_t, t, e, upstream);
      param_opt.step(backend.net().params, g.params, lr);
      if (!vocab.tokens[idx].empty()) {
        row_opt[static_cast<std::size_t>(idx)].step(vocab.table[idx], g.emb[0],
                                                    lr);
      }
    }
    curve.push_back(total / static_cast<double>(count));
  }
  return curve;
}

}  // namespace nrel
