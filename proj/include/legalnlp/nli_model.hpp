#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "legalnlp/cnn.hpp"
#include "legalnlp/encoder.hpp"
#include "legalnlp/model_config.hpp"
#include "legalnlp/nn.hpp"

namespace legalnlp {

enum class NliLabel : int { kEntailed = 0, kNeutral = 1, kContradict = 2 };

inline constexpr std::size_t kNliClasses = 3;

const std::vector<std::string>& nli_label_names();
std::string nli_label_name(NliLabel label);
/// Case-insensitive; throws on anything but the three class names.
NliLabel parse_nli_label(const std::string& name);

struct NliPrediction {
  NliLabel label = NliLabel::kEntailed;
  std::array<double, kNliClasses> probabilities{};
};

/// argmax with ties going to the lowest index, plus softmax probabilities.
NliPrediction nli_prediction_from_logits(std::span<const double> logits);

// Transformer CLS vector ⊕ CNN features → dropout → one linear layer → 3 logits.
class NliModel {
 public:
  /// Builds and initializes all parameters from `seed`.
  NliModel(const ModelConfig& config, std::uint64_t seed);
  NliModel(const NliModel&) = delete;
  NliModel& operator=(const NliModel&) = delete;
  NliModel(NliModel&&) = default;

  /// Logits [B×3]; softmax is left to the loss / prediction.
  Tensor forward(const TokenBatch& batch, const ForwardContext& ctx) const;
  std::vector<NliPrediction> predict(const TokenBatch& batch) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return config_; }
  const TransformerEncoder& encoder() const { return encoder_; }
  const CnnBranch& cnn() const { return cnn_; }
  const Linear& classifier() const { return classifier_; }

 private:
  static ModelConfig checked(ModelConfig config);

  ModelConfig config_;
  ParameterStore store_;
  Rng init_rng_;
  TransformerEncoder encoder_;
  CnnBranch cnn_;
  Linear classifier_;
};

}  // namespace legalnlp
