#pragma once

#include <stdexcept>
#include <string>

namespace nrel {

// A prompt token that is not present in the vocabulary. The message names
// the offending token.
class UnknownTokenError : public std::runtime_error {
 public:
  explicit UnknownTokenError(const std::string& token)
      : std::runtime_error("unknown token: \"" + token + "\""), token_(token) {}
  const std::string& token() const { return token_; }

 private:
  std::string token_;
};

// An operation that needs a capability the backend does not provide
// (e.g. embedding gradients on a non-differentiable backend, or parameter
// finetuning on the analytic backend, which has no trainable parameters).
class UnsupportedBackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A latent exceeded the divergence guard (norm > 1e6) or became non-finite;
// the message reports where.
class NumericDivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nrel
