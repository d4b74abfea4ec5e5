#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nrel/vec.hpp"

namespace nrel {

// Labeled samples from a ground-truth class mixture, shared by both
// backends. File format (UTF-8 text):
//   header line:  D K count seed
//   sample lines: D space-separated reals, then the class token string
struct Dataset {
  int D = 0;
  int K = 0;
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
  Mat points;
  std::vector<std::string> labels;
};

// Seeded draws from K equally weighted classes on a circle of the given
// radius (first two coordinates; remaining coordinates zero-mean), isotropic
// scale sigma. Class of sample i is drawn uniformly. Labels are
// "class0".."class{K-1}".
Dataset generate_dataset(int K, int D, std::uint64_t count,
                         std::uint64_t seed, double radius = 2.0,
                         double sigma = 0.5);

void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace nrel
