#include "nrel/embedding.hpp"

#include <stdexcept>

#include "nrel/errors.hpp"
#include "nrel/rng.hpp"

namespace nrel {

Embedding Embedding::from_rows(Mat rows) {
  if (rows.empty()) {
    throw std::invalid_argument("Embedding: needs at least one token row");
  }
  const std::size_t d = rows[0].size();
  for (const auto& r : rows) {
    if (r.size() != d) {
      throw std::invalid_argument("Embedding: ragged token rows");
    }
    if (!all_finite(r)) {
      throw std::invalid_argument("Embedding: non-finite entries");
    }
  }
  Embedding e;
  e.tokens = std::move(rows);
  e.repool();
  return e;
}

Embedding Embedding::zero(std::size_t n, std::size_t d) {
  Embedding e;
  e.tokens.assign(n, Vec(d, 0.0));
  e.pooled.assign(d, 0.0);
  return e;
}

void Embedding::repool() {
  const std::size_t d = dim();
  pooled.assign(d, 0.0);
  for (const auto& row : tokens) {
    for (std::size_t i = 0; i < d; ++i) pooled[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& x : pooled) x *= inv;
}

int PromptVocabulary::find(const std::string& token) const {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == token) return static_cast<int>(i);
  }
  return -1;
}

PromptVocabulary make_class_vocab(int K, int d) {
  if (K < 1 || d < K) {
    throw std::invalid_argument(
        "make_class_vocab: needs K >= 1 and d >= K (one unit axis per class)");
  }
  PromptVocabulary v;
  v.seed = 0;
  for (int k = 0; k < K; ++k) {
    Vec row(static_cast<std::size_t>(d), 0.0);
    row[static_cast<std::size_t>(k)] = 1.0;
    v.tokens.push_back("class" + std::to_string(k));
    v.table.push_back(std::move(row));
  }
  v.tokens.push_back("");
  v.table.push_back(Vec(static_cast<std::size_t>(d), 0.0));
  return v;
}

PromptVocabulary make_random_vocab(const std::vector<std::string>& tokens,
                                   int d, std::uint64_t seed, double scale) {
  PromptVocabulary v;
  v.seed = seed;
  Rng rng(seed);
  for (const auto& tok : tokens) {
    if (tok.empty()) continue;  // reserved, appended below
    if (v.find(tok) >= 0) {
      throw std::invalid_argument("make_random_vocab: duplicate token " + tok);
    }
    Vec row(static_cast<std::size_t>(d));
    for (auto& x : row) x = scale * rng.normal();
    v.tokens.push_back(tok);
    v.table.push_back(std::move(row));
  }
  v.tokens.push_back("");
  v.table.push_back(Vec(static_cast<std::size_t>(d), 0.0));
  return v;
}

Embedding encode_prompt(const PromptVocabulary& vocab,
                        const std::vector<std::string>& prompt) {
  if (prompt.empty() || prompt.size() > 8) {
    throw std::invalid_argument("encode_prompt: prompt length must be 1..8");
  }
  Mat rows;
  rows.reserve(prompt.size());
  for (const auto& tok : prompt) {
    const int idx = vocab.find(tok);
    if (idx < 0) throw UnknownTokenError(tok);
    rows.push_back(vocab.table[static_cast<std::size_t>(idx)]);
  }
  return Embedding::from_rows(std::move(rows));
}

}  // namespace nrel
