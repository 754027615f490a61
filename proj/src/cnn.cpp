#include "legalnlp/cnn.hpp"

#include <algorithm>
#include <stdexcept>

namespace legalnlp {

CnnBranch::CnnBranch(const CnnConfig& config, ParameterStore& store,
                     const std::string& prefix, Rng& rng)
    : config_(config) {
  config_.validate();
  embedding_ = store.add(prefix + ".embedding",
                         normal_init({config_.vocab_size, config_.d_embed}, 0.02, rng));
  const std::size_t n_filters = config_.n_filters_per_width;
  for (std::size_t width : config_.filter_widths) {
    const std::string p = prefix + ".conv" + std::to_string(width);
    const std::size_t fan_in = width * config_.d_embed;
    Bank bank{width,
              store.add(p + ".filters", xavier_uniform({n_filters, width, config_.d_embed},
                                                        fan_in, n_filters, rng)),
              store.add(p + ".bias", Tensor::zeros({n_filters}))};
    banks_.push_back(std::move(bank));
  }
  projection_ = make_linear(store, prefix + ".projection", config_.pooled_width(),
                            config_.d_out, rng);
}

CnnBranch::Output CnnBranch::forward(const TokenBatch& batch, const ForwardContext&) const {
  const std::size_t max_width = config_.max_width();
  const std::size_t cols = std::max(batch.cols, max_width);
  // Short-sequence guard: widen with PAD columns.
  std::vector<std::int32_t> ids(batch.rows * cols, kPadId);
  for (std::size_t r = 0; r < batch.rows; ++r)
    std::copy_n(batch.ids.begin() + r * batch.cols, batch.cols, ids.begin() + r * cols);

  Tensor embedded = embedding_lookup(embedding_, ids, batch.rows, cols);
  std::vector<Tensor> rows;
  rows.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const std::size_t valid = batch.valid_len[r];
    if (valid == 0) {
      throw std::invalid_argument("cnn: row " + std::to_string(r) + " has no tokens");
    }
    const std::size_t effective = std::max(valid, max_width);
    Tensor x = reshape(slice(embedded, 0, r, 1), {cols, config_.d_embed});
    std::vector<Tensor> pooled;
    pooled.reserve(banks_.size());
    for (const Bank& bank : banks_) {
      Tensor activations = relu(conv1d_valid(x, bank.filters, bank.bias));
      pooled.push_back(max_over_time_masked(activations, effective - bank.width + 1));
    }
    rows.push_back(reshape(concat(pooled, 0), {1, config_.pooled_width()}));
  }
  Output out;
  out.pooled = concat(rows, 0);
  out.features = projection_(out.pooled);
  return out;
}

}  // namespace legalnlp
