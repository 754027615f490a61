#include "legalnlp/ner.hpp"

#include <algorithm>
#include <stdexcept>

namespace legalnlp {

namespace {

struct ParsedTag {
  char prefix;  // 'O', 'B' or 'I'
  EntityType type;
};

ParsedTag parse_tag(std::string_view tag) {
  if (tag == "O") return {'O', EntityType::kViolation};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return {tag[0], parse_entity_type(tag.substr(2))};
  }
  throw std::invalid_argument("malformed BIO tag '" + std::string(tag) + "'");
}

std::string make_tag(char prefix, EntityType type) {
  return std::string(1, prefix) + "-" + entity_type_name(type);
}

}  // namespace

std::string entity_type_name(EntityType type) {
  switch (type) {
    case EntityType::kViolation: return "VIOLATION";
    case EntityType::kViolatedBy: return "VIOLATED_BY";
    case EntityType::kViolatedOn: return "VIOLATED_ON";
    case EntityType::kLaw: return "LAW";
  }
  throw std::invalid_argument("invalid entity type");
}

EntityType parse_entity_type(std::string_view name) {
  for (EntityType t : kEntityTypes)
    if (entity_type_name(t) == name) return t;
  throw std::invalid_argument("unknown entity type '" + std::string(name) + "'");
}

const std::vector<std::string>& bio_labels() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> out = {"O"};
    for (EntityType t : kEntityTypes) {
      out.push_back(make_tag('B', t));
      out.push_back(make_tag('I', t));
    }
    return out;
  }();
  return labels;
}

std::size_t bio_label_index(std::string_view tag) {
  const auto& labels = bio_labels();
  auto it = std::find(labels.begin(), labels.end(), tag);
  if (it == labels.end()) throw std::invalid_argument("unknown tag '" + std::string(tag) + "'");
  return static_cast<std::size_t>(it - labels.begin());
}

bool is_valid_bio(std::span<const std::string> tags) {
  std::optional<EntityType> open;
  for (const auto& tag : tags) {
    ParsedTag p;
    try {
      p = parse_tag(tag);
    } catch (const std::invalid_argument&) {
      return false;
    }
    if (p.prefix == 'I' && open != p.type) return false;
    open = p.prefix == 'O' ? std::nullopt : std::optional<EntityType>(p.type);
  }
  return true;
}

std::vector<std::string> repair_bio(std::span<const std::string> tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  std::optional<EntityType> open;
  for (const auto& tag : tags) {
    const ParsedTag p = parse_tag(tag);
    if (p.prefix == 'I' && open != p.type) {
      out.push_back(make_tag('B', p.type));
    } else {
      out.push_back(tag);
    }
    open = p.prefix == 'O' ? std::nullopt : std::optional<EntityType>(p.type);
  }
  return out;
}

std::vector<std::string> decode_bio(const Tensor& logits, std::size_t valid_len) {
  if (logits.rank() != 2 || logits.dim(1) != kBioLabelCount) {
    throw DimensionError("decode_bio: expected [L×9] logits, got " + shape_str(logits.shape()));
  }
  if (valid_len == 0 || valid_len > logits.dim(0)) {
    throw std::out_of_range("decode_bio: valid_len " + std::to_string(valid_len) +
                            " outside [1, " + std::to_string(logits.dim(0)) + "]");
  }
  const auto& labels = bio_labels();
  auto values = logits.data();
  std::vector<std::string> greedy;
  greedy.reserve(valid_len);
  for (std::size_t t = 0; t < valid_len; ++t) {
    auto row = values.subspan(t * kBioLabelCount, kBioLabelCount);
    const auto best = std::max_element(row.begin(), row.end()) - row.begin();
    greedy.push_back(labels[static_cast<std::size_t>(best)]);
  }
  return repair_bio(greedy);
}

std::vector<EntitySpan> extract_spans(std::span<const std::string> tags) {
  if (!is_valid_bio(tags)) throw std::invalid_argument("extract_spans: input is not valid BIO");
  std::vector<EntitySpan> spans;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const ParsedTag p = parse_tag(tags[i]);
    if (p.prefix == 'B') {
      spans.push_back({i, i + 1, p.type});
    } else if (p.prefix == 'I') {
      spans.back().end = i + 1;
    }
  }
  return spans;
}

std::vector<std::string> tags_of_spans(std::span<const EntitySpan> spans, std::size_t length) {
  std::vector<std::string> tags(length, "O");
  std::vector<bool> taken(length, false);
  for (const EntitySpan& s : spans) {
    if (s.start >= s.end || s.end > length) {
      throw std::invalid_argument("span [" + std::to_string(s.start) + ", " +
                                  std::to_string(s.end) + ") outside sequence of length " +
                                  std::to_string(length));
    }
    for (std::size_t i = s.start; i < s.end; ++i) {
      if (taken[i]) throw std::invalid_argument("overlapping spans at token " + std::to_string(i));
      taken[i] = true;
      tags[i] = make_tag(i == s.start ? 'B' : 'I', s.type);
    }
  }
  return tags;
}

ModelConfig NerModel::checked(ModelConfig config) {
  if (config.task != TaskKind::kNer) throw std::invalid_argument("NerModel needs a ner config");
  if (config.head.n_classes != kBioLabelCount) {
    throw std::invalid_argument("NerModel: head must have exactly 9 classes");
  }
  config.validate();
  return config;
}

NerModel::NerModel(const ModelConfig& config, std::uint64_t seed)
    : config_(checked(config)),
      init_rng_(seed),
      encoder_(config_.encoder, store_, "encoder", init_rng_),
      head_(make_linear(store_, "tagger", config_.encoder.d_model, kBioLabelCount, init_rng_)) {}

Tensor NerModel::forward(const TokenBatch& batch, const ForwardContext& ctx) const {
  Tensor hidden = encoder_.forward(batch, ctx).hidden;
  return head_(apply_dropout(hidden, config_.head.dropout_rate, ctx));
}

std::vector<std::vector<std::string>> NerModel::predict(const TokenBatch& batch) const {
  Tensor logits = forward(batch, ForwardContext::eval());
  std::vector<std::vector<std::string>> out;
  out.reserve(batch.rows);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    Tensor row = reshape(slice(logits, 0, r, 1), {batch.cols, kBioLabelCount});
    out.push_back(decode_bio(row, batch.valid_len[r]));
  }
  return out;
}

}  // namespace legalnlp
