#pragma once

#include <cmath>
#include <cstdint>

#include "nrel/vec.hpp"

namespace nrel {

// Adaptive moment estimation with bias correction. Every gradient loop in
// this project uses these moment constants; only the learning rate varies
// per loop.
class Adam {
 public:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(Vec& x, const Vec& g, double lr) {
    require_same_dim(x, g, "Adam::step");
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < x.size(); ++i) {
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g[i];
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g[i] * g[i];
      const double mh = m_[i] / c1;
      const double vh = v_[i] / c2;
      x[i] -= lr * mh / (std::sqrt(vh) + kEps);
    }
  }

  std::uint64_t updates() const { return t_; }

 private:
  Vec m_, v_;
  std::uint64_t t_ = 0;
};

}  // namespace nrel
