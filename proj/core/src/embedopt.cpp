#include "nrel/embedopt.hpp"

#include <stdexcept>

#include "nrel/adam.hpp"
#include "nrel/errors.hpp"
#include "nrel/rng.hpp"

namespace nrel {

namespace {

// Flattened row-major view of an N x d token matrix so one Adam state covers
// the whole embedding.
Vec flatten(const Mat& rows) {
  Vec flat;
  flat.reserve(rows.size() * (rows.empty() ? 0 : rows[0].size()));
  for (const auto& row : rows) flat.insert(flat.end(), row.begin(), row.end());
  return flat;
}

void unflatten(const Vec& flat, Mat& rows) {
  std::size_t k = 0;
  for (auto& row : rows) {
    for (auto& v : row) v = flat[k++];
  }
}

}  // namespace

OptimizationReport optimize_embedding(const Vec& x_input,
                                      const Embedding& e_tgt,
                                      const DenoiserBackend& backend,
                                      const NoiseSchedule& sched,
                                      int iterations, double lr,
                                      std::uint64_t seed, int batch) {
  if (iterations < 0) {
    throw std::invalid_argument("optimize_embedding: negative iterations");
  }
  if (batch < 1) {
    throw std::invalid_argument("optimize_embedding: batch must be >= 1");
  }
  if (!backend.supports_embedding_grads()) {
    throw UnsupportedBackendError(
        "optimize_embedding: backend does not support embedding gradients");
  }

  OptimizationReport report;
  report.e_opt = e_tgt;
  report.iterations = iterations;
  report.seed = seed;
  report.lr = lr;
  report.loss_curve.reserve(static_cast<std::size_t>(iterations));

  Rng rng(seed);
  const std::size_t n = e_tgt.n();
  const std::size_t d = e_tgt.dim();
  Adam opt(n * d);
  Vec flat = flatten(report.e_opt.tokens);
  for (int it = 0; it < iterations; ++it) {
    double loss = 0.0;
    Vec grad_flat(n * d, 0.0);
    for (int b = 0; b < batch; ++b) {
      const int t = 1 + static_cast<int>(rng.uniform_int(
                            static_cast<std::uint64_t>(sched.T)));
      const Vec eps = rng.normal_vec(x_input.size());
      const Vec z_t = forward_diffuse(x_input, t, eps, sched);
      const Vec pred = backend.eval(z_t, t, report.e_opt, sched);
      Vec residual = sub(pred, eps);
      loss += sq_norm(residual);
      const Vec upstream = scaled(residual, 2.0 / static_cast<double>(batch));
      const Mat g = backend.eval_grad_e(z_t, t, report.e_opt, sched, upstream);
      std::size_t k = 0;
      for (const auto& row : g) {
        for (double v : row) grad_flat[k++] += v;
      }
    }
    report.loss_curve.push_back(loss / static_cast<double>(batch));
    opt.step(flat, grad_flat, lr);
    unflatten(flat, report.e_opt.tokens);
    report.e_opt.repool();
  }
  return report;
}

Embedding interpolate(const Embedding& e_tgt, const Embedding& e_opt,
                      double alpha) {
  if (e_tgt.n() != e_opt.n() || e_tgt.dim() != e_opt.dim()) {
    throw std::invalid_argument("interpolate: shape mismatch");
  }
  if (!std::isfinite(alpha)) {
    throw std::invalid_argument("interpolate: non-finite alpha");
  }
  Mat rows(e_tgt.n(), Vec(e_tgt.dim()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      rows[i][j] = alpha * e_tgt.tokens[i][j] + (1.0 - alpha) * e_opt.tokens[i][j];
    }
  }
  return Embedding::from_rows(std::move(rows));
}

FinetuneResult imagic_finetune(const DenoiserBackend& backend,
                               const Vec& x_input, const Embedding& e_opt,
                               const NoiseSchedule& sched, int iterations,
                               double lr, std::uint64_t seed) {
  if (iterations < 0) {
    throw std::invalid_argument("imagic_finetune: negative iterations");
  }
  const auto* net_backend = dynamic_cast<const NetBackend*>(&backend);
  if (net_backend == nullptr) {
    throw UnsupportedBackendError(
        "imagic_finetune: backend has no trainable parameters");
  }

  NetBackend local(net_backend->net());
  FinetuneResult result;
  result.loss_curve.reserve(static_cast<std::size_t>(iterations));
  Rng rng(seed);
  Adam opt(local.net().params.size());
  for (int it = 0; it < iterations; ++it) {
    const int t = 1 + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(sched.T)));
    const Vec eps = rng.normal_vec(x_input.size());
    const Vec z_t = forward_diffuse(x_input, t, eps, sched);
    const Vec pred = local.eval(z_t, t, e_opt, sched);
    Vec residual = sub(pred, eps);
    result.loss_curve.push_back(sq_norm(residual));
    const Vec upstream = scaled(residual, 2.0);
    const NetBackend::Grads g = local.grads(z_t, t, e_opt, upstream);
    opt.step(local.net().params, g.params, lr);
  }
  result.net = local.net();
  return result;
}

}  // namespace nrel
