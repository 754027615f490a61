#include "legalnlp/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <stdexcept>

#include "legalnlp/ops.hpp"

namespace legalnlp {

namespace {

const std::vector<std::string>& reserved_tokens() {
  static const std::vector<std::string> names = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  return names;
}

}  // namespace

Vocabulary::Vocabulary() : Vocabulary(reserved_tokens()) {}

Vocabulary::Vocabulary(std::vector<std::string> id_to_token)
    : id_to_token_(std::move(id_to_token)) {
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], static_cast<std::int32_t>(i)).second) {
      throw std::invalid_argument("duplicate vocabulary entry '" + id_to_token_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> id_to_token) {
  const auto& reserved = reserved_tokens();
  if (id_to_token.size() < kReservedCount ||
      !std::equal(reserved.begin(), reserved.end(), id_to_token.begin())) {
    throw std::invalid_argument("vocabulary must start with the four reserved tokens");
  }
  return Vocabulary(std::move(id_to_token));
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& corpus,
                             std::size_t min_freq) {
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");
  std::map<std::string, std::size_t> counts;
  for (const auto& seq : corpus)
    for (const auto& tok : seq) ++counts[tok];
  const auto& reserved = reserved_tokens();
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [tok, n] : counts) {
    if (n < min_freq) continue;
    if (std::find(reserved.begin(), reserved.end(), tok) != reserved.end()) continue;
    kept.emplace_back(tok, n);
  }
  // counts is already lexicographic, so a stable sort on frequency keeps ties ordered.
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens = reserved;
  for (auto& k : kept) tokens.push_back(k.first);
  return from_tokens(std::move(tokens));
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary of size " +
                            std::to_string(id_to_token_.size()));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

std::string normalize_token(std::string_view token) {
  std::string out(token);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.push_back(normalize_token(text.substr(i, j - i)));
    i = j;
  }
  return out;
}

EncodedRow encode_sequence(std::span<const std::string> tokens, const Vocabulary& vocab,
                           std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("encode_sequence: max_len must be >= 1");
  EncodedRow row;
  row.ids.assign(max_len, kPadId);
  row.mask.assign(max_len, 0);
  row.segments.assign(max_len, 0);
  row.valid_len = std::min(tokens.size(), max_len);
  for (std::size_t j = 0; j < row.valid_len; ++j) {
    row.ids[j] = vocab.id(tokens[j]);
    row.mask[j] = 1;
  }
  return row;
}

EncodedRow encode_pair(std::string_view premise, std::string_view hypothesis,
                       const Vocabulary& vocab, std::size_t max_len) {
  if (max_len < 5) throw std::invalid_argument("encode_pair: max_len must be >= 5");
  std::vector<std::string> p = tokenize(premise);
  std::vector<std::string> h = tokenize(hypothesis);
  if (p.empty() && h.empty()) {
    throw std::invalid_argument("encode_pair: premise and hypothesis are both empty");
  }
  const std::size_t budget = max_len - 3;
  while (p.size() + h.size() > budget) {
    if (p.size() >= h.size()) {
      p.pop_back();
    } else {
      h.pop_back();
    }
  }
  EncodedRow row;
  row.ids.assign(max_len, kPadId);
  row.mask.assign(max_len, 0);
  row.segments.assign(max_len, 0);
  std::size_t j = 0;
  row.ids[j++] = kClsId;
  for (const auto& t : p) row.ids[j++] = vocab.id(t);
  row.ids[j++] = kSepId;
  const std::size_t hyp_start = j;
  for (const auto& t : h) row.ids[j++] = vocab.id(t);
  row.ids[j++] = kSepId;
  row.valid_len = j;
  for (std::size_t k = 0; k < j; ++k) {
    row.mask[k] = 1;
    row.segments[k] = k >= hyp_start ? 1 : 0;
  }
  return row;
}

std::vector<std::string> decode(const EncodedRow& row, const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(row.valid_len);
  for (std::size_t j = 0; j < row.valid_len; ++j) out.push_back(vocab.token(row.ids[j]));
  return out;
}

TokenBatch TokenBatch::from_rows(std::span<const EncodedRow> rows) {
  if (rows.empty()) throw std::invalid_argument("TokenBatch: no rows");
  TokenBatch batch;
  batch.rows = rows.size();
  batch.cols = rows[0].ids.size();
  for (const auto& r : rows) {
    if (r.ids.size() != batch.cols || r.mask.size() != batch.cols ||
        r.segments.size() != batch.cols) {
      throw std::invalid_argument("TokenBatch: rows differ in length");
    }
    batch.ids.insert(batch.ids.end(), r.ids.begin(), r.ids.end());
    batch.mask.insert(batch.mask.end(), r.mask.begin(), r.mask.end());
    batch.segments.insert(batch.segments.end(), r.segments.begin(), r.segments.end());
    batch.valid_len.push_back(r.valid_len);
  }
  return batch;
}

TokenBatch TokenBatch::padded_to(std::size_t new_cols) const {
  if (new_cols < cols) throw std::invalid_argument("padded_to: cannot shrink a batch");
  TokenBatch out;
  out.rows = rows;
  out.cols = new_cols;
  out.valid_len = valid_len;
  out.ids.assign(rows * new_cols, kPadId);
  out.mask.assign(rows * new_cols, 0);
  out.segments.assign(rows * new_cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      out.ids[r * new_cols + c] = ids[r * cols + c];
      out.mask[r * new_cols + c] = mask[r * cols + c];
      out.segments[r * new_cols + c] = segments[r * cols + c];
    }
  return out;
}

std::vector<int> labels_to_ids(std::span<const std::string> tags,
                               std::span<const std::string> label_set, std::size_t length) {
  std::vector<int> out(length, kIgnoreIndex);
  for (std::size_t i = 0; i < tags.size(); ++i) {
    auto it = std::find(label_set.begin(), label_set.end(), tags[i]);
    if (it == label_set.end()) throw std::invalid_argument("unknown tag '" + tags[i] + "'");
    if (i < length) out[i] = static_cast<int>(it - label_set.begin());
  }
  return out;
}

std::vector<int> labels_to_ids(std::span<const std::string> tags,
                               std::span<const std::string> label_set) {
  return labels_to_ids(tags, label_set, tags.size());
}

}  // namespace legalnlp
