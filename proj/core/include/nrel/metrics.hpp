#pragma once

#include <string>
#include <vector>

#include "nrel/backend.hpp"
#include "nrel/embedding.hpp"
#include "nrel/schedule.hpp"
#include "nrel/vec.hpp"

namespace nrel {

// Declared data range used when converting identity MSE to PSNR. Desk-scale
// data lives on the unit scale.
inline constexpr double kPsnrRange = 1.0;

// Mean squared elementwise difference.
double mse(const Vec& a, const Vec& b);

// 10*log10(range^2 / mse(a, b)); +infinity when the inputs coincide
// (serialized as the string "inf").
double psnr(const Vec& a, const Vec& b, double range = kPsnrRange);

// Backend-specific alignment of a clean point with a prompt: exact
// conditional log-density for the analytic backend, a fixed-draw negative
// noise-prediction loss for the trained one. Higher = better aligned.
double target_alignment(const Vec& x, const std::vector<std::string>& prompt,
                        const PromptVocabulary& vocab,
                        const DenoiserBackend& backend,
                        const NoiseSchedule& sched);

}  // namespace nrel
