#pragma once

#include <filesystem>
#include <vector>

#include "nrel/embedding.hpp"
#include "nrel/net.hpp"
#include "nrel/vec.hpp"

namespace nrel {

// Checkpoint files are a single ASCII dimension-header line followed by the
// values as raw little-endian 64-bit floats, in row-major order:
//   NRELVEC n           n doubles
//   NRELMAT r c         r*c doubles
//   NRELEMB n d         n*d doubles (token rows of one embedding)
//   NRELEMBL s n d      s*n*d doubles (a list of s embeddings)
//   NRELNET D H F d     all network parameters (layout W1,b1,W2,b2,W3,b3)
// The vocabulary sidecar is text: header "NRELVOC V d seed", then one line
// per token: the token string followed by its d row values.

void save_vector(const std::filesystem::path& path, const Vec& v);
Vec load_vector(const std::filesystem::path& path);

void save_matrix(const std::filesystem::path& path, const Mat& m);
Mat load_matrix(const std::filesystem::path& path);

void save_embedding(const std::filesystem::path& path, const Embedding& e);
Embedding load_embedding(const std::filesystem::path& path);

void save_embedding_list(const std::filesystem::path& path,
                         const std::vector<Embedding>& list);
std::vector<Embedding> load_embedding_list(const std::filesystem::path& path);

void save_net(const std::filesystem::path& path, const DenoiserNet& net);
DenoiserNet load_net(const std::filesystem::path& path);

void save_vocab(const std::filesystem::path& path,
                const PromptVocabulary& vocab);
PromptVocabulary load_vocab(const std::filesystem::path& path);

}  // namespace nrel
