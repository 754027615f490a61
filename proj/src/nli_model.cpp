#include "legalnlp/nli_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace legalnlp {

const std::vector<std::string>& nli_label_names() {
  static const std::vector<std::string> names = {"Entailed", "Neutral", "Contradict"};
  return names;
}

std::string nli_label_name(NliLabel label) {
  return nli_label_names().at(static_cast<std::size_t>(label));
}

NliLabel parse_nli_label(const std::string& name) {
  auto lower = [](std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  const std::string key = lower(name);
  const auto& names = nli_label_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (lower(names[i]) == key) return static_cast<NliLabel>(i);
  }
  throw std::invalid_argument("unknown NLI label '" + name +
                              "' (expected Entailed, Neutral or Contradict)");
}

NliPrediction nli_prediction_from_logits(std::span<const double> logits) {
  if (logits.size() != kNliClasses) {
    throw DimensionError("nli prediction needs 3 logits, got " + std::to_string(logits.size()));
  }
  NliPrediction p;
  std::size_t best = 0;
  for (std::size_t c = 1; c < kNliClasses; ++c)
    if (logits[c] > logits[best]) best = c;
  p.label = static_cast<NliLabel>(best);
  const double peak = logits[best];
  double z = 0.0;
  for (std::size_t c = 0; c < kNliClasses; ++c) {
    p.probabilities[c] = std::exp(logits[c] - peak);
    z += p.probabilities[c];
  }
  for (double& v : p.probabilities) v /= z;
  return p;
}

ModelConfig NliModel::checked(ModelConfig config) {
  if (config.task != TaskKind::kNli) throw std::invalid_argument("NliModel needs an nli config");
  if (config.head.n_classes != kNliClasses) {
    throw std::invalid_argument("NliModel: head must have exactly 3 classes");
  }
  config.validate();
  return config;
}

NliModel::NliModel(const ModelConfig& config, std::uint64_t seed)
    : config_(checked(config)),
      init_rng_(seed),
      encoder_(config_.encoder, store_, "encoder", init_rng_),
      cnn_(config_.cnn, store_, "cnn", init_rng_),
      classifier_(make_linear(store_, "classifier", config_.encoder.d_model + config_.cnn.d_out,
                              kNliClasses, init_rng_)) {}

Tensor NliModel::forward(const TokenBatch& batch, const ForwardContext& ctx) const {
  TransformerEncoder::Output enc = encoder_.forward(batch, ctx);
  Tensor sentence = pooled_representation(enc.hidden, batch);
  Tensor keywords = cnn_.forward(batch, ctx).features;
  const Tensor parts[] = {sentence, keywords};
  Tensor joined = apply_dropout(concat(parts, 1), config_.head.dropout_rate, ctx);
  return classifier_(joined);
}

std::vector<NliPrediction> NliModel::predict(const TokenBatch& batch) const {
  Tensor logits = forward(batch, ForwardContext::eval());
  std::vector<NliPrediction> out;
  out.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    out.push_back(nli_prediction_from_logits(logits.data().subspan(r * kNliClasses, kNliClasses)));
  }
  return out;
}

}  // namespace legalnlp
