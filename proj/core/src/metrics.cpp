#include "nrel/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nrel {

double mse(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "mse");
  if (a.empty()) throw std::invalid_argument("mse: empty vectors");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double psnr(const Vec& a, const Vec& b, double range) {
  if (!(range > 0.0)) throw std::invalid_argument("psnr: range must be > 0");
  const double m = mse(a, b);
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / m);
}

double target_alignment(const Vec& x, const std::vector<std::string>& prompt,
                        const PromptVocabulary& vocab,
                        const DenoiserBackend& backend,
                        const NoiseSchedule& sched) {
  return backend.alignment(x, encode_prompt(vocab, prompt), sched);
}

}  // namespace nrel
