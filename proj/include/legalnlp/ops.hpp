#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "legalnlp/tensor.hpp"

namespace legalnlp {

using Rng = std::mt19937_64;

/// Targets with this value are excluded from cross_entropy_mean.
inline constexpr int kIgnoreIndex = -100;

inline constexpr double kLayerNormEps = 1e-5;

// --- linear algebra -------------------------------------------------------

/// [m×k]·[k×n] → [m×n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// Batched product [B×m×k]·[B×k×n] → [B×m×n].
Tensor bmm(const Tensor& a, const Tensor& b);

// --- shape ----------------------------------------------------------------

Tensor reshape(const Tensor& x, Shape shape);
Tensor permute(const Tensor& x, const std::vector<std::size_t>& axes);
/// Contiguous sub-range [start, start+length) along `axis`.
Tensor slice(const Tensor& x, std::size_t axis, std::size_t start, std::size_t length);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);

// --- elementwise ----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double factor);
/// x[..×n] + bias[n], broadcast over leading axes.
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor relu(const Tensor& x);
/// Exact GELU, 0.5·x·(1 + erf(x/√2)).
Tensor gelu(const Tensor& x);

// --- reductions -----------------------------------------------------------

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

// --- neural-network primitives --------------------------------------------

/// Numerically stable softmax along `axis` (negative counts from the end).
Tensor softmax(const Tensor& x, int axis);

/// Sets scores[b, :, :, j] to -inf for every key j >= valid_len[b].
/// scores is [B×H×Lq×Lk]; unmasked entries pass through unchanged.
Tensor mask_keys(const Tensor& scores, std::span<const std::size_t> valid_len);

/// Normalizes over the last axis, then applies gamma/beta.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = kLayerNormEps);

/// Mean over non-ignored rows of -log softmax(logits)[target]. Rows whose
/// target is kIgnoreIndex do not contribute; all-ignored yields 0.
Tensor cross_entropy_mean(const Tensor& logits, std::span<const int> targets);

/// Valid (no padding) 1-D cross-correlation:
/// x[L×C] with filters[F×k×C] and bias[F] → [(L−k+1)×F].
Tensor conv1d_valid(const Tensor& x, const Tensor& filters, const Tensor& bias);

/// Per-channel max over rows [0, valid_len) of x[L×F] → [F].
Tensor max_over_time_masked(const Tensor& x, std::size_t valid_len);

/// Row gather: table[V×d], ids laid out row-major as [rows×cols] → [rows×cols×d].
Tensor embedding_lookup(const Tensor& table, std::span<const std::int32_t> ids,
                        std::size_t rows, std::size_t cols);

/// Inverted dropout. Identity when !training or rate == 0.
Tensor dropout(const Tensor& x, double rate, Rng& rng, bool training);

}  // namespace legalnlp
