#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "nrel/vec.hpp"

namespace nrel {

// Deterministic random source. The transforms from raw engine output to
// uniform/normal doubles are fixed here (not delegated to the stdlib
// distributions, whose algorithms are implementation-defined) so that a seed
// pins the exact byte-level output of every artifact across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via the Box-Muller transform; the second value of each
  // pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // Guard the log singularity at u1 = 0.
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Uniform integer in [0, n). Modulo reduction: the bias is < n/2^64,
  // negligible at the scales used here and exactly reproducible.
  std::uint64_t uniform_int(std::uint64_t n) { return gen_() % n; }

  Vec normal_vec(std::size_t d) {
    Vec out(d);
    for (auto& x : out) x = normal();
    return out;
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace nrel
