#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "legalnlp/nli_model.hpp"
#include "legalnlp/nn.hpp"

namespace legalnlp {

// Input-validation failure; what() reads "<source>:<line>: <reason>".
class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& reason);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string reason_;
};

struct NerRecord {
  std::vector<std::string> tokens;
  std::vector<std::string> ner_tags;

  friend bool operator==(const NerRecord&, const NerRecord&) = default;
};

struct NliRecord {
  std::string premise;
  std::string hypothesis;
  NliLabel label = NliLabel::kEntailed;
  std::string legal_act;

  friend bool operator==(const NliRecord&, const NliRecord&) = default;
};

/// JSON lines, one {"tokens": [...], "ner_tags": [...]} object per line.
/// Blank lines are skipped; other fields are ignored.
std::vector<NerRecord> parse_ner_dataset(std::istream& in, const std::string& source);
std::vector<NerRecord> load_ner_dataset(const std::filesystem::path& path);

enum class NliFormat { kJsonLines, kDelimited };

/// JSON lines or a delimited file with a header naming premise, hypothesis,
/// label and legal_act (any column order). Double-quoted fields may contain
/// the delimiter; "" escapes a quote.
std::vector<NliRecord> parse_nli_dataset(std::istream& in, const std::string& source,
                                         NliFormat format, char delimiter = ',');
/// Format from the extension: .jsonl/.json → JSON lines, .tsv → tab, else comma.
std::vector<NliRecord> load_nli_dataset(const std::filesystem::path& path);

void write_ner_dataset(std::ostream& out, const std::vector<NerRecord>& records);
void write_nli_jsonl(std::ostream& out, const std::vector<NliRecord>& records);

/// Seeded Fisher-Yates permutation of 0..n-1, independent of the standard
/// library's shuffle implementation.
std::vector<std::size_t> seeded_permutation(std::size_t n, Rng& rng);

/// ⌈n·(1−fraction)⌉, computed as n − ⌊n·fraction⌋.
std::size_t train_split_size(std::size_t n, double fraction);

/// Shuffles with `seed`, keeps train_split_size() records for training and
/// the remainder for validation.
template <typename Record>
std::pair<std::vector<Record>, std::vector<Record>> split_train_val(
    const std::vector<Record>& records, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split_train_val: fraction must be in (0, 1)");
  }
  if (records.size() < 2) throw std::invalid_argument("split_train_val: need at least 2 records");
  Rng rng(seed);
  const std::vector<std::size_t> order = seeded_permutation(records.size(), rng);
  const std::size_t n_train = train_split_size(records.size(), fraction);
  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? out.first : out.second).push_back(records[order[i]]);
  }
  return out;
}

}  // namespace legalnlp
