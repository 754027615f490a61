#include "legalnlp/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "legalnlp/ner.hpp"

namespace legalnlp {

using nlohmann::json;

DataError::DataError(const std::string& source, std::size_t line, const std::string& reason)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason),
      source_(source),
      line_(line),
      reason_(reason) {}

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

json parse_json_object(const std::string& line, const std::string& source, std::size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw DataError(source, lineno, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DataError(source, lineno, "expected a JSON object");
  return j;
}

std::vector<std::string> string_array(const json& j, const char* key, const std::string& source,
                                      std::size_t lineno) {
  if (!j.contains(key)) throw DataError(source, lineno, std::string("missing field '") + key + "'");
  const json& arr = j.at(key);
  if (!arr.is_array()) throw DataError(source, lineno, std::string("'") + key + "' is not an array");
  std::vector<std::string> out;
  for (const json& v : arr) {
    if (!v.is_string()) {
      throw DataError(source, lineno, std::string("'") + key + "' holds a non-string element");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

NliRecord make_nli_record(const std::string& premise, const std::string& hypothesis,
                          const std::string& label, const std::string& legal_act,
                          const std::string& source, std::size_t lineno) {
  NliRecord r;
  r.premise = trim(premise);
  r.hypothesis = trim(hypothesis);
  if (r.premise.empty()) throw DataError(source, lineno, "empty premise");
  if (r.hypothesis.empty()) throw DataError(source, lineno, "empty hypothesis");
  try {
    r.label = parse_nli_label(trim(label));
  } catch (const std::invalid_argument& e) {
    throw DataError(source, lineno, e.what());
  }
  r.legal_act = trim(legal_act);
  return r;
}

std::vector<std::string> split_delimited(const std::string& line, char delimiter,
                                         const std::string& source, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && trim(field).empty() && !was_quoted) {
      field.clear();
      quoted = true;
      was_quoted = true;
    } else if (c == delimiter) {
      fields.push_back(field);
      field.clear();
      was_quoted = false;
    } else {
      field += c;
    }
  }
  if (quoted) throw DataError(source, lineno, "unterminated quoted field");
  fields.push_back(field);
  return fields;
}

}  // namespace

std::vector<NerRecord> parse_ner_dataset(std::istream& in, const std::string& source) {
  std::vector<NerRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) continue;
    const json j = parse_json_object(line, source, lineno);
    NerRecord r;
    r.tokens = string_array(j, "tokens", source, lineno);
    r.ner_tags = string_array(j, "ner_tags", source, lineno);
    if (r.tokens.empty()) throw DataError(source, lineno, "no tokens");
    if (r.tokens.size() != r.ner_tags.size()) {
      throw DataError(source, lineno,
                      std::to_string(r.tokens.size()) + " tokens but " +
                          std::to_string(r.ner_tags.size()) + " tags");
    }
    for (const auto& tag : r.ner_tags) {
      try {
        bio_label_index(tag);
      } catch (const std::invalid_argument&) {
        throw DataError(source, lineno, "unknown tag '" + tag + "'");
      }
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<NerRecord> load_ner_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  return parse_ner_dataset(in, path.string());
}

std::vector<NliRecord> parse_nli_dataset(std::istream& in, const std::string& source,
                                         NliFormat format, char delimiter) {
  std::vector<NliRecord> records;
  std::string line;
  std::size_t lineno = 0;
  static const char* const kFields[] = {"premise", "hypothesis", "label", "legal_act"};

  if (format == NliFormat::kJsonLines) {
    while (std::getline(in, line)) {
      ++lineno;
      strip_cr(line);
      if (is_blank(line)) continue;
      const json j = parse_json_object(line, source, lineno);
      std::string values[4];
      for (int f = 0; f < 4; ++f) {
        if (!j.contains(kFields[f])) {
          throw DataError(source, lineno, std::string("missing field '") + kFields[f] + "'");
        }
        if (!j.at(kFields[f]).is_string()) {
          throw DataError(source, lineno, std::string("'") + kFields[f] + "' is not a string");
        }
        values[f] = j.at(kFields[f]).get<std::string>();
      }
      records.push_back(make_nli_record(values[0], values[1], values[2], values[3], source, lineno));
    }
    return records;
  }

  std::map<std::string, std::size_t> column;
  std::size_t n_columns = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (is_blank(line)) continue;
    std::vector<std::string> fields = split_delimited(line, delimiter, source, lineno);
    if (column.empty()) {
      for (std::size_t c = 0; c < fields.size(); ++c) column[lower(trim(fields[c]))] = c;
      for (const char* name : kFields) {
        if (!column.contains(name)) {
          throw DataError(source, lineno, std::string("header lacks column '") + name + "'");
        }
      }
      n_columns = fields.size();
      continue;
    }
    if (fields.size() != n_columns) {
      throw DataError(source, lineno,
                      "expected " + std::to_string(n_columns) + " fields, got " +
                          std::to_string(fields.size()));
    }
    records.push_back(make_nli_record(fields[column["premise"]], fields[column["hypothesis"]],
                                      fields[column["label"]], fields[column["legal_act"]],
                                      source, lineno));
  }
  if (column.empty()) throw DataError(source, lineno, "missing header line");
  return records;
}

std::vector<NliRecord> load_nli_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  const std::string ext = lower(path.extension().string());
  if (ext == ".jsonl" || ext == ".json") {
    return parse_nli_dataset(in, path.string(), NliFormat::kJsonLines);
  }
  return parse_nli_dataset(in, path.string(), NliFormat::kDelimited, ext == ".tsv" ? '\t' : ',');
}

void write_ner_dataset(std::ostream& out, const std::vector<NerRecord>& records) {
  for (const auto& r : records) {
    out << json{{"tokens", r.tokens}, {"ner_tags", r.ner_tags}}.dump() << '\n';
  }
}

void write_nli_jsonl(std::ostream& out, const std::vector<NliRecord>& records) {
  for (const auto& r : records) {
    out << json{{"premise", r.premise},
                {"hypothesis", r.hypothesis},
                {"label", nli_label_name(r.label)},
                {"legal_act", r.legal_act}}
               .dump()
        << '\n';
  }
}

std::vector<std::size_t> seeded_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

std::size_t train_split_size(std::size_t n, double fraction) {
  // The small slack absorbs representation error, e.g. 710·0.2.
  const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
  return n - std::min(val, n);
}

}  // namespace legalnlp
