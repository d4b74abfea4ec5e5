#include "nrel/net.hpp"

#include <cmath>
#include <stdexcept>

#include "nrel/rng.hpp"

namespace nrel {

namespace {

// Offsets of each parameter block within the flat vector.
struct Layout {
  std::size_t in, h, out;
  std::size_t w1, b1, w2, b2, w3, b3, total;
  explicit Layout(const DenoiserNet& n)
      : in(static_cast<std::size_t>(n.input_dim())),
        h(static_cast<std::size_t>(n.H)),
        out(static_cast<std::size_t>(n.D)) {
    w1 = 0;
    b1 = w1 + h * in;
    w2 = b1 + h;
    b2 = w2 + h * h;
    w3 = b2 + h;
    b3 = w3 + out * h;
    total = b3 + out;
  }
};

struct Forward {
  Vec input, h1, h2, out;
};

Forward forward_pass(const DenoiserNet& net, const Vec& z, int t,
                     const Embedding& e) {
  const Layout L(net);
  Forward f;
  f.input.reserve(L.in);
  f.input.insert(f.input.end(), z.begin(), z.end());
  const Vec enc = time_encoding(t, net.F);
  f.input.insert(f.input.end(), enc.begin(), enc.end());
  f.input.insert(f.input.end(), e.pooled.begin(), e.pooled.end());
  if (f.input.size() != L.in) {
    throw std::invalid_argument("net: input dimension mismatch");
  }
  const Vec& p = net.params;
  f.h1.assign(L.h, 0.0);
  for (std::size_t i = 0; i < L.h; ++i) {
    double a = p[L.b1 + i];
    const std::size_t row = L.w1 + i * L.in;
    for (std::size_t j = 0; j < L.in; ++j) a += p[row + j] * f.input[j];
    f.h1[i] = std::tanh(a);
  }
  f.h2.assign(L.h, 0.0);
  for (std::size_t i = 0; i < L.h; ++i) {
    double a = p[L.b2 + i];
    const std::size_t row = L.w2 + i * L.h;
    for (std::size_t j = 0; j < L.h; ++j) a += p[row + j] * f.h1[j];
    f.h2[i] = std::tanh(a);
  }
  f.out.assign(L.out, 0.0);
  for (std::size_t i = 0; i < L.out; ++i) {
    double a = p[L.b3 + i];
    const std::size_t row = L.w3 + i * L.h;
    for (std::size_t j = 0; j < L.h; ++j) a += p[row + j] * f.h2[j];
    f.out[i] = a;
  }
  return f;
}

}  // namespace

Vec time_encoding(int t, int F) {
  Vec enc(2 * static_cast<std::size_t>(F));
  for (int i = 0; i < F; ++i) {
    const double w =
        std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(F));
    enc[2 * static_cast<std::size_t>(i)] = std::sin(w * t);
    enc[2 * static_cast<std::size_t>(i) + 1] = std::cos(w * t);
  }
  return enc;
}

DenoiserNet make_net(int D, int H, int F, int d, std::uint64_t seed) {
  if (D < 1 || H < 1 || F < 1 || d < 1) {
    throw std::invalid_argument("make_net: dimensions must be positive");
  }
  DenoiserNet net;
  net.D = D;
  net.H = H;
  net.F = F;
  net.d = d;
  const Layout L(net);
  net.params.assign(L.total, 0.0);
  Rng rng(seed);
  auto fill = [&](std::size_t begin, std::size_t count, std::size_t fan_in) {
    const double a = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) {
      net.params[begin + i] = a * (2.0 * rng.uniform() - 1.0);
    }
  };
  fill(L.w1, L.h * L.in + L.h, L.in);        // W1, b1
  fill(L.w2, L.h * L.h + L.h, L.h);          // W2, b2
  fill(L.w3, L.out * L.h + L.out, L.h);      // W3, b3
  return net;
}

NetBackend::NetBackend(DenoiserNet net) : net_(std::move(net)) {
  if (net_.params.size() != net_.param_count()) {
    throw std::invalid_argument("NetBackend: parameter vector size mismatch");
  }
}

Vec NetBackend::eval(const Vec& z, int t, const Embedding& e,
                     const NoiseSchedule& /*sched*/) const {
  count_eval();
  if (static_cast<int>(z.size()) != net_.D) {
    throw std::invalid_argument("NetBackend::eval: data dimension mismatch");
  }
  if (static_cast<int>(e.dim()) != net_.d) {
    throw std::invalid_argument("NetBackend::eval: embedding dim mismatch");
  }
  return forward_pass(net_, z, t, e).out;
}

NetBackend::Grads NetBackend::grads(const Vec& z, int t, const Embedding& e,
                                    const Vec& upstream) const {
  const Layout L(net_);
  if (upstream.size() != L.out) {
    throw std::invalid_argument("NetBackend::grads: upstream dim mismatch");
  }
  const Forward f = forward_pass(net_, z, t, e);
  const Vec& p = net_.params;

  Grads g;
  g.params.assign(L.total, 0.0);

  // Output layer.
  Vec dh2(L.h, 0.0);
  for (std::size_t i = 0; i < L.out; ++i) {
    const double u = upstream[i];
    g.params[L.b3 + i] = u;
    const std::size_t row = L.w3 + i * L.h;
    for (std::size_t j = 0; j < L.h; ++j) {
      g.params[row + j] = u * f.h2[j];
      dh2[j] += p[row + j] * u;
    }
  }
  // Second hidden layer (tanh' = 1 - h^2).
  Vec da2(L.h);
  for (std::size_t i = 0; i < L.h; ++i) {
    da2[i] = dh2[i] * (1.0 - f.h2[i] * f.h2[i]);
  }
  Vec dh1(L.h, 0.0);
  for (std::size_t i = 0; i < L.h; ++i) {
    g.params[L.b2 + i] = da2[i];
    const std::size_t row = L.w2 + i * L.h;
    for (std::size_t j = 0; j < L.h; ++j) {
      g.params[row + j] = da2[i] * f.h1[j];
      dh1[j] += p[row + j] * da2[i];
    }
  }
  // First hidden layer.
  Vec da1(L.h);
  for (std::size_t i = 0; i < L.h; ++i) {
    da1[i] = dh1[i] * (1.0 - f.h1[i] * f.h1[i]);
  }
  Vec dinput(L.in, 0.0);
  for (std::size_t i = 0; i < L.h; ++i) {
    g.params[L.b1 + i] = da1[i];
    const std::size_t row = L.w1 + i * L.in;
    for (std::size_t j = 0; j < L.in; ++j) {
      g.params[row + j] = da1[i] * f.input[j];
      dinput[j] += p[row + j] * da1[i];
    }
  }
  // Embedding slice of the input, un-pooled over token rows.
  const std::size_t emb_off = static_cast<std::size_t>(net_.D + 2 * net_.F);
  const double inv_n = 1.0 / static_cast<double>(e.n());
  g.emb.assign(e.n(), Vec(static_cast<std::size_t>(net_.d)));
  for (std::size_t row = 0; row < e.n(); ++row) {
    for (std::size_t j = 0; j < static_cast<std::size_t>(net_.d); ++j) {
      g.emb[row][j] = dinput[emb_off + j] * inv_n;
    }
  }
  return g;
}

Mat NetBackend::eval_grad_e(const Vec& z, int t, const Embedding& e,
                            const NoiseSchedule& /*sched*/,
                            const Vec& upstream) const {
  return grads(z, t, e, upstream).emb;
}

double NetBackend::alignment(const Vec& x, const Embedding& e,
                             const NoiseSchedule& sched) const {
  Rng rng(kAlignmentSeed);
  double total = 0.0;
  for (int j = 0; j < kAlignmentDraws; ++j) {
    const int t = 1 + static_cast<int>(
                          rng.uniform_int(static_cast<std::uint64_t>(sched.T)));
    const Vec eps = rng.normal_vec(x.size());
    const Vec zt = forward_diffuse(x, t, eps, sched);
    const Vec pred = eval(zt, t, e, sched);
    total += sq_norm(sub(pred, eps));
  }
  return -total / static_cast<double>(kAlignmentDraws);
}

}  // namespace nrel
