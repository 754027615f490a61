#include "legalnlp/encoder.hpp"

#include <cmath>
#include <stdexcept>

namespace legalnlp {

TransformerEncoder::TransformerEncoder(const EncoderConfig& config, ParameterStore& store,
                                       const std::string& prefix, Rng& rng)
    : config_(config) {
  config_.validate();
  const std::size_t d = config_.d_model;
  token_embedding_ = store.add(prefix + ".token_embedding",
                               normal_init({config_.vocab_size, d}, 0.02, rng));
  position_embedding_ = store.add(prefix + ".position_embedding",
                                  normal_init({config_.max_positions, d}, 0.02, rng));
  segment_embedding_ = store.add(prefix + ".segment_embedding",
                                 normal_init({config_.n_segments, d}, 0.02, rng));
  embed_norm_ = make_layer_norm(store, prefix + ".embed_norm", d);
  for (std::size_t l = 0; l < config_.n_layers; ++l) {
    const std::string p = prefix + ".layer" + std::to_string(l);
    Layer layer;
    layer.query = make_linear(store, p + ".query", d, d, rng);
    layer.key = make_linear(store, p + ".key", d, d, rng);
    layer.value = make_linear(store, p + ".value", d, d, rng);
    layer.out = make_linear(store, p + ".attn_out", d, d, rng);
    layer.attn_norm = make_layer_norm(store, p + ".attn_norm", d);
    layer.ff_in = make_linear(store, p + ".ff_in", d, config_.d_ff, rng);
    layer.ff_out = make_linear(store, p + ".ff_out", config_.d_ff, d, rng);
    layer.ffn_norm = make_layer_norm(store, p + ".ffn_norm", d);
    layers_.push_back(std::move(layer));
  }
}

TransformerEncoder::Output TransformerEncoder::forward(const TokenBatch& batch,
                                                       const ForwardContext& ctx) const {
  const std::size_t rows = batch.rows, cols = batch.cols;
  if (cols > config_.max_positions) {
    throw DimensionError("sequence length " + std::to_string(cols) +
                         " exceeds max_positions " + std::to_string(config_.max_positions));
  }
  for (std::size_t r = 0; r < rows; ++r) {
    if (batch.valid_len[r] == 0) {
      throw std::invalid_argument("encoder: row " + std::to_string(r) + " has no tokens");
    }
  }
  std::vector<std::int32_t> positions(rows * cols);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    positions[i] = static_cast<std::int32_t>(i % cols);
  }
  std::vector<std::int32_t> segments = batch.segments;
  if (segments.empty()) segments.assign(rows * cols, 0);

  Tensor x = add(add(embedding_lookup(token_embedding_, batch.ids, rows, cols),
                     embedding_lookup(position_embedding_, positions, rows, cols)),
                 embedding_lookup(segment_embedding_, segments, rows, cols));
  x = apply_dropout(embed_norm_(x), config_.dropout_rate, ctx);

  Output out;
  for (const Layer& layer : layers_) {
    Tensor attended = self_attention(layer, x, batch, out.attention);
    x = layer.attn_norm(add(x, apply_dropout(attended, config_.dropout_rate, ctx)));
    Tensor ff = layer.ff_out(gelu(layer.ff_in(x)));
    x = layer.ffn_norm(add(x, apply_dropout(ff, config_.dropout_rate, ctx)));
  }
  out.hidden = x;
  return out;
}

Tensor TransformerEncoder::self_attention(const Layer& layer, const Tensor& x,
                                          const TokenBatch& batch,
                                          std::vector<Tensor>& attention) const {
  const std::size_t rows = batch.rows, len = batch.cols;
  const std::size_t heads = config_.n_heads;
  const std::size_t head_dim = config_.d_model / heads;

  // [B×L×d] → [B·H × L × dh]
  auto split_heads = [&](const Tensor& t) {
    return reshape(permute(reshape(t, {rows, len, heads, head_dim}), {0, 2, 1, 3}),
                   {rows * heads, len, head_dim});
  };
  Tensor q = split_heads(layer.query(x));
  Tensor v = split_heads(layer.value(x));
  Tensor k_t = reshape(permute(reshape(layer.key(x), {rows, len, heads, head_dim}), {0, 2, 3, 1}),
                       {rows * heads, head_dim, len});

  Tensor scores = scale(bmm(q, k_t), 1.0 / std::sqrt(static_cast<double>(head_dim)));
  scores = mask_keys(reshape(scores, {rows, heads, len, len}), batch.valid_len);
  Tensor weights = softmax(scores, -1);
  attention.push_back(weights);

  Tensor context = bmm(reshape(weights, {rows * heads, len, len}), v);
  context = reshape(permute(reshape(context, {rows, heads, len, head_dim}), {0, 2, 1, 3}),
                    {rows, len, config_.d_model});
  return layer.out(context);
}

Tensor pooled_representation(const Tensor& hidden, const TokenBatch& batch) {
  if (hidden.rank() != 3 || hidden.dim(0) != batch.rows || hidden.dim(1) != batch.cols) {
    throw DimensionError("pooled_representation: hidden " + shape_str(hidden.shape()) +
                         " does not match batch [" + std::to_string(batch.rows) + "x" +
                         std::to_string(batch.cols) + "]");
  }
  return reshape(slice(hidden, 1, 0, 1), {hidden.dim(0), hidden.dim(2)});
}

}  // namespace legalnlp
