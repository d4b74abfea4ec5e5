#include "nrel/dataset.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nrel/csvio.hpp"
#include "nrel/rng.hpp"

namespace nrel {

Dataset generate_dataset(int K, int D, std::uint64_t count,
                         std::uint64_t seed, double radius, double sigma) {
  if (K < 1 || D < 2 || count < 1) {
    throw std::invalid_argument(
        "generate_dataset: needs K >= 1, D >= 2, count >= 1");
  }
  Dataset data;
  data.D = D;
  data.K = K;
  data.count = count;
  data.seed = seed;
  Rng rng(seed);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto k = rng.uniform_int(static_cast<std::uint64_t>(K));
    const double ang =
        2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(K);
    Vec x = rng.normal_vec(static_cast<std::size_t>(D));
    for (auto& v : x) v *= sigma;
    x[0] += radius * std::cos(ang);
    x[1] += radius * std::sin(ang);
    data.points.push_back(std::move(x));
    data.labels.push_back("class" + std::to_string(k));
  }
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("save_dataset: cannot open " + path.string());
  }
  out << data.D << ' ' << data.K << ' ' << data.count << ' ' << data.seed
      << '\n';
  for (std::size_t i = 0; i < data.points.size(); ++i) {
    for (double v : data.points[i]) out << format_double(v) << ' ';
    out << data.labels[i] << '\n';
  }
  if (!out) {
    throw std::runtime_error("save_dataset: write failed " + path.string());
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("load_dataset: cannot open " + path.string());
  }
  Dataset data;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("load_dataset: empty file");
  }
  {
    std::istringstream hs(line);
    if (!(hs >> data.D >> data.K >> data.count >> data.seed)) {
      throw std::invalid_argument("load_dataset: bad header");
    }
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Vec x(static_cast<std::size_t>(data.D));
    for (auto& v : x) {
      if (!(ls >> v)) throw std::invalid_argument("load_dataset: bad sample");
    }
    std::string label;
    if (!(ls >> label)) {
      throw std::invalid_argument("load_dataset: missing label");
    }
    data.points.push_back(std::move(x));
    data.labels.push_back(std::move(label));
  }
  if (data.points.size() != data.count) {
    throw std::invalid_argument("load_dataset: sample count mismatch");
  }
  return data;
}

}  // namespace nrel
