#include "nrel/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nrel/errors.hpp"

namespace nrel {

void GMMSpec::validate() const {
  const std::size_t K = components();
  if (K == 0) throw std::invalid_argument("GMMSpec: no components");
  if (sigmas.size() != K || log_priors.size() != K || keys.size() != K) {
    throw std::invalid_argument("GMMSpec: inconsistent component counts");
  }
  const std::size_t D = data_dim();
  const std::size_t d = key_dim();
  for (std::size_t k = 0; k < K; ++k) {
    if (means[k].size() != D || keys[k].size() != d) {
      throw std::invalid_argument("GMMSpec: ragged means or keys");
    }
    if (!(sigmas[k] > 0.0)) {
      throw std::invalid_argument("GMMSpec: sigmas must be positive");
    }
  }
  if (!(tau_w > 0.0)) {
    throw std::invalid_argument("GMMSpec: tau_w must be positive");
  }
}

double GMMSpec::checksum() const {
  double s = tau_w;
  double w = 1.0;
  auto fold = [&](double v) {
    w *= 1.0000001;
    s += v * w;
  };
  for (const auto& m : means)
    for (double v : m) fold(v);
  for (double v : sigmas) fold(v);
  for (double v : log_priors) fold(v);
  for (const auto& u : keys)
    for (double v : u) fold(v);
  return s;
}

GMMSpec make_circle_gmm(int K, int D, int d, double radius, double sigma,
                        double key_scale) {
  if (K < 1 || D < 2 || d < K) {
    throw std::invalid_argument(
        "make_circle_gmm: needs K >= 1, D >= 2, d >= K");
  }
  GMMSpec spec;
  spec.tau_w = 1.0;
  const double lp = -std::log(static_cast<double>(K));
  for (int k = 0; k < K; ++k) {
    const double ang =
        2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(K);
    Vec mu(static_cast<std::size_t>(D), 0.0);
    mu[0] = radius * std::cos(ang);
    mu[1] = radius * std::sin(ang);
    Vec key(static_cast<std::size_t>(d), 0.0);
    key[static_cast<std::size_t>(k)] = key_scale;
    spec.means.push_back(std::move(mu));
    spec.sigmas.push_back(sigma);
    spec.log_priors.push_back(lp);
    spec.keys.push_back(std::move(key));
  }
  spec.validate();
  return spec;
}

GMMSpec make_common_mean_gmm(const Vec& mean, double sigma,
                             double sibling_ratio, int d, double key_scale) {
  if (d < 2) throw std::invalid_argument("make_common_mean_gmm: needs d >= 2");
  if (!(sibling_ratio > 0.0)) {
    throw std::invalid_argument("make_common_mean_gmm: ratio must be positive");
  }
  GMMSpec spec;
  spec.tau_w = 1.0;
  const double lp = -std::log(2.0);
  for (int k = 0; k < 2; ++k) {
    Vec key(static_cast<std::size_t>(d), 0.0);
    key[static_cast<std::size_t>(k)] = key_scale;
    spec.means.push_back(mean);
    spec.sigmas.push_back(k == 0 ? sigma : sigma * sibling_ratio);
    spec.log_priors.push_back(lp);
    spec.keys.push_back(std::move(key));
  }
  spec.validate();
  return spec;
}

GmmBackend::GmmBackend(GMMSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
}

static Vec softmax(Vec logits);

double data_variance(const GMMSpec& spec) {
  spec.validate();
  const std::size_t K = spec.components();
  const std::size_t D = spec.data_dim();
  const Vec pi = softmax(spec.log_priors);
  Vec mean(D, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < D; ++i) mean[i] += pi[k] * spec.means[k][i];
  }
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double sq = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      const double dlt = spec.means[k][i] - mean[i];
      sq += dlt * dlt;
    }
    total += pi[k] * (sq + static_cast<double>(D) * spec.sigmas[k] *
                               spec.sigmas[k]);
  }
  return total / static_cast<double>(D);
}

static Vec softmax(Vec logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (auto& v : logits) {
    v = std::exp(v - m);
    sum += v;
  }
  for (auto& v : logits) v /= sum;
  return logits;
}

Vec GmmBackend::cond_weights(const Embedding& e) const {
  const std::size_t K = spec_.components();
  Vec logits(K);
  for (std::size_t k = 0; k < K; ++k) {
    logits[k] = dot(e.pooled, spec_.keys[k]) / spec_.tau_w + spec_.log_priors[k];
  }
  return softmax(std::move(logits));
}

// Log-density of z under N(center, var*I) up to the dimension-independent
// constant -D/2*log(2*pi), which cancels in every use below except the
// absolute log-density, where it is added back.
static double log_gauss_core(const Vec& z, const Vec& center, double var) {
  double q = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double dlt = z[i] - center[i];
    q += dlt * dlt;
  }
  return -0.5 * static_cast<double>(z.size()) * std::log(var) -
         q / (2.0 * var);
}

Vec GmmBackend::responsibilities(const Vec& z, int t, const Embedding& e,
                                 const NoiseSchedule& sched) const {
  const std::size_t K = spec_.components();
  const double a = sched.alpha_bar[t];
  const double sa = std::sqrt(a);
  Vec logits(K);
  Vec center(z.size());
  for (std::size_t k = 0; k < K; ++k) {
    const double var = a * spec_.sigmas[k] * spec_.sigmas[k] + (1.0 - a);
    for (std::size_t i = 0; i < z.size(); ++i) {
      center[i] = sa * spec_.means[k][i];
    }
    logits[k] = dot(e.pooled, spec_.keys[k]) / spec_.tau_w +
                spec_.log_priors[k] + log_gauss_core(z, center, var);
  }
  return softmax(std::move(logits));
}

Vec GmmBackend::eval(const Vec& z, int t, const Embedding& e,
                     const NoiseSchedule& sched) const {
  count_eval();
  if (z.size() != spec_.data_dim()) {
    throw std::invalid_argument("GmmBackend::eval: data dimension mismatch");
  }
  const double a = sched.alpha_bar[t];
  const double sa = std::sqrt(a);
  const double sv = std::sqrt(1.0 - a);
  const Vec r = responsibilities(z, t, e, sched);
  Vec score(z.size(), 0.0);
  for (std::size_t k = 0; k < spec_.components(); ++k) {
    const double var = a * spec_.sigmas[k] * spec_.sigmas[k] + (1.0 - a);
    for (std::size_t i = 0; i < z.size(); ++i) {
      score[i] += r[k] * (sa * spec_.means[k][i] - z[i]) / var;
    }
  }
  Vec out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = -sv * score[i];
  return out;
}

Mat GmmBackend::eval_grad_e(const Vec& z, int t, const Embedding& e,
                            const NoiseSchedule& sched,
                            const Vec& upstream) const {
  require_same_dim(z, upstream, "GmmBackend::eval_grad_e");
  const std::size_t K = spec_.components();
  const std::size_t d = spec_.key_dim();
  const double a = sched.alpha_bar[t];
  const double sa = std::sqrt(a);
  const double sv = std::sqrt(1.0 - a);
  const Vec r = responsibilities(z, t, e, sched);

  // phi_k = <upstream, -sv*(sa*mu_k - z)/var_k>: the contribution of
  // component k to <upstream, eval>. The prediction is sum_k r_k * c_k with
  // only r depending on the embedding, so the pooled gradient is the softmax
  // Jacobian applied to the per-component logit sensitivities u_k/tau_w:
  //   d<upstream, eval>/d pooled = sum_k r_k*(phi_k - sum_j r_j phi_j)*u_k/tau_w
  Vec phi(K);
  double f = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double var = a * spec_.sigmas[k] * spec_.sigmas[k] + (1.0 - a);
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      s += upstream[i] * (sa * spec_.means[k][i] - z[i]) / var;
    }
    phi[k] = -sv * s;
    f += r[k] * phi[k];
  }
  Vec grad_pooled(d, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double c = r[k] * (phi[k] - f) / spec_.tau_w;
    for (std::size_t i = 0; i < d; ++i) {
      grad_pooled[i] += c * spec_.keys[k][i];
    }
  }
  // Mean pooling spreads the pooled gradient evenly over token rows.
  const double inv_n = 1.0 / static_cast<double>(e.n());
  Mat grad(e.n(), Vec(d));
  for (std::size_t row = 0; row < e.n(); ++row) {
    for (std::size_t i = 0; i < d; ++i) {
      grad[row][i] = grad_pooled[i] * inv_n;
    }
  }
  return grad;
}

double GmmBackend::alignment(const Vec& x, const Embedding& e,
                             const NoiseSchedule& /*sched*/) const {
  const std::size_t K = spec_.components();
  const std::size_t D = spec_.data_dim();
  const Vec w = cond_weights(e);
  Vec terms(K);
  for (std::size_t k = 0; k < K; ++k) {
    const double var = spec_.sigmas[k] * spec_.sigmas[k];
    terms[k] = std::log(w[k]) + log_gauss_core(x, spec_.means[k], var);
  }
  const double m = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double v : terms) sum += std::exp(v - m);
  return m + std::log(sum) -
         0.5 * static_cast<double>(D) * std::log(2.0 * std::numbers::pi);
}

Vec GmmBackend::sample_data(const Embedding& e, Rng& rng) const {
  const Vec w = cond_weights(e);
  const double u = rng.uniform();
  std::size_t k = 0;
  double acc = 0.0;
  for (; k + 1 < w.size(); ++k) {
    acc += w[k];
    if (u < acc) break;
  }
  Vec x = rng.normal_vec(spec_.data_dim());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = spec_.means[k][i] + spec_.sigmas[k] * x[i];
  }
  return x;
}

Mat DenoiserBackend::eval_grad_e(const Vec&, int, const Embedding&,
                                 const NoiseSchedule&, const Vec&) const {
  throw UnsupportedBackendError(
      "backend does not support embedding gradients");
}

}  // namespace nrel
