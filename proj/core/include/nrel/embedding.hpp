#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrel/vec.hpp"

namespace nrel {

// An N x d conditioning matrix (one row per prompt token) with its cached
// row-mean. Backends consume the pooled vector; optimization updates the
// token rows, so the N x d surface is preserved even though conditioning is
// mean-pooled.
struct Embedding {
  Mat tokens;  // N rows, each of dimension d
  Vec pooled;  // mean over rows, kept in sync by from_rows/repool

  static Embedding from_rows(Mat rows);
  static Embedding zero(std::size_t n, std::size_t d);

  std::size_t n() const { return tokens.size(); }
  std::size_t dim() const { return tokens.empty() ? 0 : tokens[0].size(); }

  // Recompute the pooled vector after mutating rows in place.
  void repool();
};

// Token-to-row lookup table standing in for a text encoder. The reserved
// empty-string token "" always maps to the all-zero row (the null prompt).
struct PromptVocabulary {
  std::vector<std::string> tokens;
  Mat table;  // one row per token, dimension d
  std::uint64_t seed = 0;

  int find(const std::string& token) const;
  std::size_t dim() const { return table.empty() ? 0 : table[0].size(); }
};

// Vocabulary of tokens "class0".."class{K-1}" whose rows are the exact unit
// basis vectors e_k, plus the reserved "" null token. Used with the analytic
// backend, whose component keys are scaled unit vectors.
PromptVocabulary make_class_vocab(int K, int d);

// Vocabulary with seeded Gaussian rows (scale 0.1) for the given tokens,
// plus the reserved "" null token. Used as the trainable token table.
PromptVocabulary make_random_vocab(const std::vector<std::string>& tokens,
                                   int d, std::uint64_t seed,
                                   double scale = 0.1);

// Row-lookup encoding. 1 <= N <= 8 tokens; unknown tokens raise
// UnknownTokenError naming the token. The one-token prompt [""] yields the
// zero embedding.
Embedding encode_prompt(const PromptVocabulary& vocab,
                        const std::vector<std::string>& prompt);

}  // namespace nrel
