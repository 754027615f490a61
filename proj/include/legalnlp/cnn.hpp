#pragma once

#include <string>
#include <vector>

#include "legalnlp/model_config.hpp"
#include "legalnlp/nn.hpp"
#include "legalnlp/vocab.hpp"

namespace legalnlp {

// Keyword detector: own embedding table, parallel conv banks (one per filter
// width) with ReLU and masked max-over-time pooling, then a projection.
//
// Rows shorter than the widest filter are right-padded with PAD embeddings
// up to that width, so every bank has at least one window. Pooling only
// considers windows that end inside max(valid_len, max_width).
class CnnBranch {
 public:
  struct Output {
    Tensor pooled;    // [B×(banks·n_filters)], before projection
    Tensor features;  // [B×d_out]
  };

  CnnBranch(const CnnConfig& config, ParameterStore& store, const std::string& prefix,
            Rng& rng);

  Output forward(const TokenBatch& batch, const ForwardContext& ctx) const;

  const CnnConfig& config() const { return config_; }

 private:
  struct Bank {
    std::size_t width;
    Tensor filters;  // [F×width×d_embed]
    Tensor bias;     // [F]
  };

  CnnConfig config_;
  Tensor embedding_;
  std::vector<Bank> banks_;
  Linear projection_;
};

}  // namespace legalnlp
