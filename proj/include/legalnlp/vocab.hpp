#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace legalnlp {

inline constexpr std::int32_t kPadId = 0;
inline constexpr std::int32_t kUnkId = 1;
inline constexpr std::int32_t kClsId = 2;
inline constexpr std::int32_t kSepId = 3;
inline constexpr std::size_t kReservedCount = 4;

// Token <-> id map. Ids 0..3 are PAD, UNK, CLS, SEP; corpus tokens follow
// in (frequency desc, lexicographic) order.
class Vocabulary {
 public:
  Vocabulary();

  static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                          std::size_t min_freq);
  /// Rebuilds from a full id→token list (reserved entries included).
  static Vocabulary from_tokens(std::vector<std::string> id_to_token);

  /// Id of `token`, or kUnkId when absent.
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return id_to_token_.size(); }
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  explicit Vocabulary(std::vector<std::string> id_to_token);

  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, std::int32_t> token_to_id_;
};

std::string normalize_token(std::string_view token);
/// Whitespace split with lowercasing.
std::vector<std::string> tokenize(std::string_view text);

// One padded row. mask[j] == 1 iff j < valid_len.
struct EncodedRow {
  std::vector<std::int32_t> ids;
  std::vector<std::uint8_t> mask;
  std::vector<std::int32_t> segments;
  std::size_t valid_len = 0;
};

/// Maps tokens 1:1 (no normalization), truncating/padding to max_len.
/// An empty input yields valid_len 0; callers must reject it.
EncodedRow encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                           std::size_t max_len);

/// [CLS] premise [SEP] hypothesis [SEP] padded to max_len. The longer side
/// loses tokens from its end first (premise on ties). Segment 0 covers CLS,
/// premise and the first SEP; segment 1 the hypothesis and the second SEP.
EncodedRow encode_pair(std::string_view premise, std::string_view hypothesis,
                       const Vocabulary& vocab, std::size_t max_len);

/// Tokens at the valid positions of `row`.
std::vector<std::string> decode(const EncodedRow& row, const Vocabulary& vocab);

struct TokenBatch {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int32_t> ids;       // rows×cols
  std::vector<std::uint8_t> mask;      // rows×cols
  std::vector<std::int32_t> segments;  // rows×cols
  std::vector<std::size_t> valid_len;  // rows

  static TokenBatch from_rows(std::span<const EncodedRow> rows);

  std::int32_t id(std::size_t row, std::size_t col) const { return ids[row * cols + col]; }
  /// Copy widened to `new_cols` columns with PAD / mask 0 / segment 0.
  TokenBatch padded_to(std::size_t new_cols) const;
};

/// Positional tag→index mapping, padded with kIgnoreIndex to `length`.
/// Tags beyond `length` are dropped. Throws naming the first unknown tag.
std::vector<int> labels_to_ids(std::span<const std::string> tags,
                               std::span<const std::string> label_set, std::size_t length);
std::vector<int> labels_to_ids(std::span<const std::string> tags,
                               std::span<const std::string> label_set);

}  // namespace legalnlp
