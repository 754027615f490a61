#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "legalnlp/encoder.hpp"
#include "legalnlp/model_config.hpp"
#include "legalnlp/nn.hpp"

namespace legalnlp {

enum class EntityType : int { kViolation = 0, kViolatedBy = 1, kViolatedOn = 2, kLaw = 3 };

inline constexpr std::size_t kEntityTypeCount = 4;
inline constexpr std::size_t kBioLabelCount = 2 * kEntityTypeCount + 1;

inline constexpr std::array<EntityType, kEntityTypeCount> kEntityTypes = {
    EntityType::kViolation, EntityType::kViolatedBy, EntityType::kViolatedOn, EntityType::kLaw};

/// VIOLATION, VIOLATED_BY, VIOLATED_ON, LAW.
std::string entity_type_name(EntityType type);
EntityType parse_entity_type(std::string_view name);

/// O, then B-t / I-t for each type in declaration order.
const std::vector<std::string>& bio_labels();
std::size_t bio_label_index(std::string_view tag);

struct EntitySpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // exclusive
  EntityType type = EntityType::kViolation;

  friend auto operator<=>(const EntitySpan&, const EntitySpan&) = default;
};

bool is_valid_bio(std::span<const std::string> tags);

/// Rewrites every I-t that does not continue a B-t/I-t of the same type to B-t.
std::vector<std::string> repair_bio(std::span<const std::string> tags);

/// Greedy per-token argmax over logits[L×9] restricted to [0, valid_len),
/// followed by repair_bio. Ties go to the lowest label index.
std::vector<std::string> decode_bio(const Tensor& logits, std::size_t valid_len);

/// Maximal B/I runs as spans. Throws std::invalid_argument on invalid BIO.
std::vector<EntitySpan> extract_spans(std::span<const std::string> tags);

/// Inverse of extract_spans for non-overlapping spans inside [0, length).
std::vector<std::string> tags_of_spans(std::span<const EntitySpan> spans, std::size_t length);

// Linear token-classification head over the transformer encoder.
class NerModel {
 public:
  NerModel(const ModelConfig& config, std::uint64_t seed);
  NerModel(const NerModel&) = delete;
  NerModel& operator=(const NerModel&) = delete;
  NerModel(NerModel&&) = default;

  /// Logits [B×L×9].
  Tensor forward(const TokenBatch& batch, const ForwardContext& ctx) const;
  /// Valid BIO tags per row, over that row's valid positions.
  std::vector<std::vector<std::string>> predict(const TokenBatch& batch) const;

  ParameterStore& parameters() { return store_; }
  const ParameterStore& parameters() const { return store_; }
  const ModelConfig& config() const { return config_; }
  const TransformerEncoder& encoder() const { return encoder_; }

 private:
  static ModelConfig checked(ModelConfig config);

  ModelConfig config_;
  ParameterStore store_;
  Rng init_rng_;
  TransformerEncoder encoder_;
  Linear head_;
};

}  // namespace legalnlp
