#pragma once

#include <cstdint>

#include "nrel/dataset.hpp"
#include "nrel/embedding.hpp"
#include "nrel/net.hpp"
#include "nrel/schedule.hpp"

namespace nrel {

// Noise-prediction training: for each example draw t uniformly from {1..T}
// and eps from N(0, I), form z_t by forward diffusion, and minimize
// ||eval(z_t, t, e_prompt) - eps||^2 with Adam over the network parameters
// and (jointly) the prompt token rows of the vocabulary. The reserved null
// token row stays zero. Returns the per-epoch mean loss; epochs = 0 leaves
// the model untouched and returns an empty curve.
Vec train_denoiser(NetBackend& backend, const Dataset& data,
                   PromptVocabulary& vocab, const NoiseSchedule& sched,
                   int epochs, double lr, std::uint64_t seed);

}  // namespace nrel
