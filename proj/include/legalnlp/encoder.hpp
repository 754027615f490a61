#pragma once

#include <string>
#include <vector>

#include "legalnlp/model_config.hpp"
#include "legalnlp/nn.hpp"
#include "legalnlp/vocab.hpp"

namespace legalnlp {

// Post-norm transformer encoder with learned absolute positions and
// segment embeddings.
class TransformerEncoder {
 public:
  struct Output {
    Tensor hidden;                   // [B×L×d_model]
    std::vector<Tensor> attention;   // per layer, [B×H×L×L]
  };

  TransformerEncoder(const EncoderConfig& config, ParameterStore& store,
                     const std::string& prefix, Rng& rng);

  /// Throws if L > max_positions or any row has valid_len 0.
  Output forward(const TokenBatch& batch, const ForwardContext& ctx) const;

  const EncoderConfig& config() const { return config_; }

 private:
  struct Layer {
    Linear query, key, value, out;
    LayerNormParams attn_norm;
    Linear ff_in, ff_out;
    LayerNormParams ffn_norm;
  };

  Tensor self_attention(const Layer& layer, const Tensor& x, const TokenBatch& batch,
                        std::vector<Tensor>& attention) const;

  EncoderConfig config_;
  Tensor token_embedding_;
  Tensor position_embedding_;
  Tensor segment_embedding_;
  LayerNormParams embed_norm_;
  std::vector<Layer> layers_;
};

/// Hidden state at the CLS position: hidden[:, 0, :] → [B×d].
Tensor pooled_representation(const Tensor& hidden, const TokenBatch& batch);

}  // namespace legalnlp
