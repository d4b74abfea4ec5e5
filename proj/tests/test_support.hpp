#pragma once

// Shared fixtures and helpers for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nrel/backend.hpp"
#include "nrel/embedding.hpp"
#include "nrel/gmm.hpp"
#include "nrel/net.hpp"
#include "nrel/rng.hpp"
#include "nrel/schedule.hpp"
#include "nrel/vec.hpp"

namespace nrel_test {

inline constexpr int kKeyDim = 16;

// Single standard-normal component: the analytic prediction is
// sqrt(1 - alpha_bar[t]) * z, which makes round trips exactly analyzable.
inline nrel::GMMSpec make_std_normal_spec() {
  nrel::GMMSpec spec;
  spec.means = {{0.0, 0.0}};
  spec.sigmas = {1.0};
  spec.log_priors = {0.0};
  spec.keys = nrel::Mat(1, nrel::Vec(kKeyDim, 0.0));
  spec.keys[0][0] = 8.0;
  return spec;
}

// Two well-separated tight components at (+-8, 0): within a component the
// mixture behaves like a single Gaussian, so mode centers round trip almost
// exactly and the only residual error is the step-count-limited contraction
// of the deviation from the center. That residual scales with sigma^2 and is
// independent of the separation, while the data variance grows with the
// separation squared, so the wide spacing gives a relative-error bound a
// comfortable structural margin.
inline nrel::GMMSpec make_separated_spec() {
  nrel::GMMSpec spec;
  spec.means = {{8.0, 0.0}, {-8.0, 0.0}};
  spec.sigmas = {0.25, 0.25};
  spec.log_priors = {std::log(0.5), std::log(0.5)};
  spec.keys = nrel::Mat(2, nrel::Vec(kKeyDim, 0.0));
  spec.keys[0][0] = 8.0;
  spec.keys[1][1] = 8.0;
  return spec;
}

inline bool bitwise_equal(const nrel::Vec& a, const nrel::Vec& b) {
  if (a.size() != b.size()) return false;
  return a.empty() ||
         std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

inline bool bitwise_equal(const nrel::Mat& a, const nrel::Mat& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!bitwise_equal(a[i], b[i])) return false;
  }
  return true;
}

// A backend with a constant prediction and no gradient support; used to
// drive divergence guards and capability errors.
class ConstBackend : public nrel::DenoiserBackend {
 public:
  explicit ConstBackend(nrel::Vec value) : value_(std::move(value)) {}

  nrel::Vec eval(const nrel::Vec&, int, const nrel::Embedding&,
                 const nrel::NoiseSchedule&) const override {
    count_eval();
    return value_;
  }
  bool supports_embedding_grads() const override { return false; }
  int data_dim() const override { return static_cast<int>(value_.size()); }
  double alignment(const nrel::Vec&, const nrel::Embedding&,
                   const nrel::NoiseSchedule&) const override {
    return 0.0;
  }
  const char* alignment_surrogate_name() const override { return "none"; }

 private:
  nrel::Vec value_;
};

// Delegates to an analytic backend until the evaluation budget runs out,
// then throws; used to exercise per-cell failure handling in sweeps.
class FailingBackend : public nrel::DenoiserBackend {
 public:
  FailingBackend(nrel::GMMSpec spec, int budget)
      : inner_(std::move(spec)), budget_(budget) {}

  nrel::Vec eval(const nrel::Vec& z, int t, const nrel::Embedding& e,
                 const nrel::NoiseSchedule& sched) const override {
    count_eval();
    if (--budget_ < 0) throw std::runtime_error("injected backend failure");
    return inner_.eval(z, t, e, sched);
  }
  nrel::Mat eval_grad_e(const nrel::Vec& z, int t, const nrel::Embedding& e,
                        const nrel::NoiseSchedule& sched,
                        const nrel::Vec& upstream) const override {
    return inner_.eval_grad_e(z, t, e, sched, upstream);
  }
  bool supports_embedding_grads() const override { return true; }
  int data_dim() const override { return inner_.data_dim(); }
  double alignment(const nrel::Vec& x, const nrel::Embedding& e,
                   const nrel::NoiseSchedule& sched) const override {
    return inner_.alignment(x, e, sched);
  }
  const char* alignment_surrogate_name() const override {
    return inner_.alignment_surrogate_name();
  }

 private:
  nrel::GmmBackend inner_;
  mutable int budget_;
};

// Relative agreement of a central finite difference with an analytic value,
// floored at scale 1 so near-zero gradients compare absolutely.
inline double fd_rel_err(double fd, double analytic) {
  double scale = 1.0;
  if (std::abs(fd) > scale) scale = std::abs(fd);
  if (std::abs(analytic) > scale) scale = std::abs(analytic);
  return std::abs(fd - analytic) / scale;
}

// Max relative finite-difference error of the analytic-backend embedding
// gradient over seeded random probes (point, timestep, embedding, upstream,
// perturbed coordinate).
inline double gmm_embedding_fd_max_err(const nrel::GmmBackend& backend,
                                       const nrel::NoiseSchedule& sched,
                                       int probes, std::uint64_t seed) {
  constexpr double h = 1e-5;
  nrel::Rng rng(seed);
  const std::size_t D = static_cast<std::size_t>(backend.data_dim());
  const std::size_t d = backend.spec().key_dim();
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const nrel::Vec z = nrel::scaled(rng.normal_vec(D), 2.5);
    const int t = 1 + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(sched.T)));
    const std::size_t n = 1 + rng.uniform_int(2);
    nrel::Mat rows(n);
    for (auto& row : rows) row = nrel::scaled(rng.normal_vec(d), 0.3);
    const nrel::Embedding e = nrel::Embedding::from_rows(rows);
    const nrel::Vec up = rng.normal_vec(D);

    const nrel::Mat g = backend.eval_grad_e(z, t, e, sched, up);
    const std::size_t r = rng.uniform_int(n);
    const std::size_t c = rng.uniform_int(d);
    auto probe_at = [&](double delta) {
      nrel::Mat shifted = rows;
      shifted[r][c] += delta;
      const nrel::Embedding pe = nrel::Embedding::from_rows(shifted);
      return nrel::dot(up, backend.eval(z, t, pe, sched));
    };
    const double fd = (probe_at(h) - probe_at(-h)) / (2.0 * h);
    const double err = fd_rel_err(fd, g[r][c]);
    if (err > worst) worst = err;
  }
  return worst;
}

// Max relative finite-difference error of the trainable backend's parameter
// and embedding gradients, alternating probe targets.
inline double net_fd_max_err(const nrel::NetBackend& backend,
                             const nrel::NoiseSchedule& sched, int probes,
                             std::uint64_t seed) {
  constexpr double h = 1e-5;
  nrel::Rng rng(seed);
  const std::size_t D = static_cast<std::size_t>(backend.data_dim());
  const std::size_t d = static_cast<std::size_t>(backend.net().d);
  double worst = 0.0;
  for (int p = 0; p < probes; ++p) {
    const nrel::Vec z = rng.normal_vec(D);
    const int t = 1 + static_cast<int>(rng.uniform_int(
                          static_cast<std::uint64_t>(sched.T)));
    const std::size_t n = 1 + rng.uniform_int(2);
    nrel::Mat rows(n);
    for (auto& row : rows) row = nrel::scaled(rng.normal_vec(d), 0.5);
    const nrel::Embedding e = nrel::Embedding::from_rows(rows);
    const nrel::Vec up = rng.normal_vec(D);

    const nrel::NetBackend::Grads g = backend.grads(z, t, e, up);
    double analytic = 0.0;
    double fd = 0.0;
    if (p % 2 == 0) {
      const std::size_t idx = rng.uniform_int(backend.net().params.size());
      analytic = g.params[idx];
      auto probe_at = [&](double delta) {
        nrel::DenoiserNet copy = backend.net();
        copy.params[idx] += delta;
        const nrel::NetBackend local(std::move(copy));
        return nrel::dot(up, local.eval(z, t, e, sched));
      };
      fd = (probe_at(h) - probe_at(-h)) / (2.0 * h);
    } else {
      const std::size_t r = rng.uniform_int(n);
      const std::size_t c = rng.uniform_int(d);
      analytic = g.emb[r][c];
      auto probe_at = [&](double delta) {
        nrel::Mat shifted = rows;
        shifted[r][c] += delta;
        const nrel::Embedding pe = nrel::Embedding::from_rows(shifted);
        return nrel::dot(up, backend.eval(z, t, pe, sched));
      };
      fd = (probe_at(h) - probe_at(-h)) / (2.0 * h);
    }
    const double err = fd_rel_err(fd, analytic);
    if (err > worst) worst = err;
  }
  return worst;
}

}  // namespace nrel_test
