#pragma once

#include <cstdint>
#include <random>

#include "legalnlp/model_config.hpp"
#include "legalnlp/run_config.hpp"
#include "legalnlp/ops.hpp"
#include "legalnlp/tensor.hpp"
#include "legalnlp/vocab.hpp"

namespace legalnlp::testing {

/// d_model 8, 2 heads, 1 layer, CNN d_embed 8 with 2 filters per width.
ModelConfig toy_model_config(TaskKind task, std::size_t vocab_size, std::size_t max_len = 16);

/// Small dims that still train quickly, no early stop before max_epochs.
RunConfig overfit_run_config(TaskKind task, std::size_t max_epochs, std::uint64_t seed);

double uniform(Rng& rng, double lo, double hi);
std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi);  // inclusive
Tensor random_tensor(const Shape& shape, Rng& rng, double lo = -1.0, double hi = 1.0,
                     bool requires_grad = true);

/// Rows with valid_len in [1, cols]; position 0 is CLS when `pair` is set and
/// segment ids switch to 1 halfway through the valid part.
TokenBatch random_token_batch(Rng& rng, std::size_t rows, std::size_t cols,
                              std::size_t vocab_size, bool pair);

}  // namespace legalnlp::testing
