#include "legalnlp/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace legalnlp {

using nlohmann::json;

namespace {

constexpr std::string_view kMagic = "LEGALNLP-CHECKPOINT";
constexpr const char* kSectionNames[] = {"meta", "vocab", "tensors"};

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

// Bounds-checked little-endian reader over one section.
class Reader {
 public:
  Reader(std::string_view bytes, const std::string& where) : bytes_(bytes), where_(where) {}

  std::uint64_t u(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw CheckpointError(where_ + ": tensor section truncated");
  }
  std::string_view bytes_;
  std::string where_;
  std::size_t pos_ = 0;
};

// Line cursor over the header part of the file.
class Cursor {
 public:
  Cursor(std::string_view bytes, const std::string& source) : bytes_(bytes), source_(source) {}

  std::string line() {
    const std::size_t nl = bytes_.find('\n', pos_);
    if (nl == std::string_view::npos) throw CheckpointError(source_ + ": truncated file");
    std::string s(bytes_.substr(pos_, nl - pos_));
    pos_ = nl + 1;
    return s;
  }
  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError(source_ + ": truncated file");
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

std::string expect_prefix(const std::string& line, const std::string& prefix,
                          const std::string& source) {
  if (line.rfind(prefix, 0) != 0) {
    throw CheckpointError(source + ": expected '" + prefix + "...', found '" + line.substr(0, 40) +
                          "'");
  }
  return line.substr(prefix.size());
}

std::uint64_t parse_u64(const std::string& text, int base, const std::string& source) {
  if (text.empty()) throw CheckpointError(source + ": empty number in header");
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used, base);
  } catch (const std::exception&) {
    throw CheckpointError(source + ": bad number '" + text + "' in header");
  }
  if (used != text.size()) throw CheckpointError(source + ": bad number '" + text + "' in header");
  return v;
}

json config_to_json(const ModelConfig& c) {
  return json{{"task", task_name(c.task)},
              {"max_len", c.max_len},
              {"pooling", c.pooling},
              {"encoder",
               {{"vocab_size", c.encoder.vocab_size},
                {"d_model", c.encoder.d_model},
                {"n_layers", c.encoder.n_layers},
                {"n_heads", c.encoder.n_heads},
                {"d_ff", c.encoder.d_ff},
                {"max_positions", c.encoder.max_positions},
                {"n_segments", c.encoder.n_segments},
                {"dropout_rate", c.encoder.dropout_rate}}},
              {"cnn",
               {{"vocab_size", c.cnn.vocab_size},
                {"d_embed", c.cnn.d_embed},
                {"filter_widths", c.cnn.filter_widths},
                {"n_filters_per_width", c.cnn.n_filters_per_width},
                {"d_out", c.cnn.d_out}}},
              {"head", {{"n_classes", c.head.n_classes}, {"dropout_rate", c.head.dropout_rate}}}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.task = parse_task(j.at("task").get<std::string>());
  c.max_len = j.at("max_len").get<std::size_t>();
  c.pooling = j.at("pooling").get<std::string>();
  const json& e = j.at("encoder");
  c.encoder.vocab_size = e.at("vocab_size").get<std::size_t>();
  c.encoder.d_model = e.at("d_model").get<std::size_t>();
  c.encoder.n_layers = e.at("n_layers").get<std::size_t>();
  c.encoder.n_heads = e.at("n_heads").get<std::size_t>();
  c.encoder.d_ff = e.at("d_ff").get<std::size_t>();
  c.encoder.max_positions = e.at("max_positions").get<std::size_t>();
  c.encoder.n_segments = e.at("n_segments").get<std::size_t>();
  c.encoder.dropout_rate = e.at("dropout_rate").get<double>();
  const json& k = j.at("cnn");
  c.cnn.vocab_size = k.at("vocab_size").get<std::size_t>();
  c.cnn.d_embed = k.at("d_embed").get<std::size_t>();
  c.cnn.filter_widths = k.at("filter_widths").get<std::vector<std::size_t>>();
  c.cnn.n_filters_per_width = k.at("n_filters_per_width").get<std::size_t>();
  c.cnn.d_out = k.at("d_out").get<std::size_t>();
  const json& h = j.at("head");
  c.head.n_classes = h.at("n_classes").get<std::size_t>();
  c.head.dropout_rate = h.at("dropout_rate").get<double>();
  return c;
}

std::string meta_section(const Checkpoint& ckpt) {
  json meta = {{"model", config_to_json(ckpt.model)},
               {"labels", ckpt.labels},
               {"training",
                {{"seed", ckpt.meta.seed},
                 {"best_epoch", ckpt.meta.best_epoch},
                 {"step", ckpt.meta.step},
                 {"eval_metric", ckpt.meta.eval_metric}}}};
  // JSON has no infinities; an unset metric is stored as null.
  if (std::isfinite(ckpt.meta.best_metric)) {
    meta["training"]["best_metric"] = ckpt.meta.best_metric;
  } else {
    meta["training"]["best_metric"] = nullptr;
  }
  return meta.dump();
}

std::string tensor_section(const std::vector<StoredTensor>& tensors) {
  std::string out;
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    put_u32(out, static_cast<std::uint32_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<std::uint32_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_u64(out, d);
    for (double v : t.values) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<StoredTensor> parse_tensors(std::string_view bytes, const std::string& source) {
  Reader r(bytes, source);
  const auto count = r.u(4);
  std::vector<StoredTensor> out;
  for (std::uint64_t i = 0; i < count; ++i) {
    StoredTensor t;
    t.name = r.str(r.u(4));
    const auto rank = r.u(4);
    if (rank > 8) throw CheckpointError(source + ": tensor '" + t.name + "' has rank " + std::to_string(rank));
    std::uint64_t numel = 1;
    for (std::uint64_t d = 0; d < rank; ++d) {
      const std::uint64_t dim = r.u(8);
      if (dim != 0 && numel > r.remaining() / dim) {
        throw CheckpointError(source + ": tensor '" + t.name + "' larger than the file");
      }
      numel *= dim;
      t.shape.push_back(dim);
    }
    if (numel > r.remaining() / 8) throw CheckpointError(source + ": tensor section truncated");
    t.values.resize(numel);
    for (auto& v : t.values) v = std::bit_cast<double>(r.u(8));
    out.push_back(std::move(t));
  }
  if (!r.done()) throw CheckpointError(source + ": trailing bytes in tensor section");
  return out;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string model_config_json(const ModelConfig& config) { return config_to_json(config).dump(); }

ModelConfig model_config_from_json(std::string_view text) {
  return config_from_json(json::parse(text));
}

Checkpoint make_checkpoint(const ModelConfig& model, const Vocabulary& vocab,
                           std::vector<std::string> labels, const TrainingMeta& meta,
                           const ParameterStore& params) {
  Checkpoint c;
  c.model = model;
  c.vocab = vocab;
  c.labels = std::move(labels);
  c.meta = meta;
  for (const auto& [name, tensor] : params.entries()) {
    c.tensors.push_back({name, tensor.shape(), {tensor.data().begin(), tensor.data().end()}});
  }
  return c;
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const std::string sections[] = {meta_section(ckpt), json(ckpt.vocab.tokens()).dump(),
                                  tensor_section(ckpt.tensors)};
  std::string out;
  out += kMagic;
  out += "\nversion " + std::to_string(kCheckpointVersion) + "\n";
  out += "config-digest " + hex64(fnv1a64(model_config_json(ckpt.model))) + "\n";
  out += "sections 3\n";
  for (int s = 0; s < 3; ++s) {
    out += std::string("section ") + kSectionNames[s] + " " + std::to_string(sections[s].size()) +
           " " + hex64(fnv1a64(sections[s])) + "\n";
    out += sections[s];
    out += "\n";
  }
  out += "end\n";
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source) {
  if (bytes.substr(0, kMagic.size()) != kMagic ||
      bytes.size() <= kMagic.size() || bytes[kMagic.size()] != '\n') {
    throw CheckpointError(source + ": not a checkpoint (bad magic)");
  }
  Cursor cur(bytes, source);
  cur.line();
  const std::uint64_t version = parse_u64(expect_prefix(cur.line(), "version ", source), 10, source);
  if (version != kCheckpointVersion) {
    throw CheckpointError(source + ": checkpoint version " + std::to_string(version) +
                          " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  const std::uint64_t digest =
      parse_u64(expect_prefix(cur.line(), "config-digest ", source), 16, source);
  const std::uint64_t n_sections = parse_u64(expect_prefix(cur.line(), "sections ", source), 10, source);
  if (n_sections != 3) throw CheckpointError(source + ": expected 3 sections");

  std::string payload[3];
  for (int s = 0; s < 3; ++s) {
    const std::string rest =
        expect_prefix(cur.line(), std::string("section ") + kSectionNames[s] + " ", source);
    const auto space = rest.find(' ');
    if (space == std::string::npos) throw CheckpointError(source + ": malformed section line");
    const std::uint64_t len = parse_u64(rest.substr(0, space), 10, source);
    const std::uint64_t sum = parse_u64(rest.substr(space + 1), 16, source);
    payload[s] = std::string(cur.take(len));
    if (cur.take(1) != "\n") throw CheckpointError(source + ": malformed section terminator");
    if (fnv1a64(payload[s]) != sum) {
      throw CheckpointError(source + ": checksum mismatch in section '" + kSectionNames[s] + "'");
    }
  }
  if (cur.line() != "end" || !cur.at_end()) throw CheckpointError(source + ": missing end marker");

  Checkpoint c;
  try {
    const json meta = json::parse(payload[0]);
    c.model = config_from_json(meta.at("model"));
    c.labels = meta.at("labels").get<std::vector<std::string>>();
    const json& t = meta.at("training");
    c.meta.seed = t.at("seed").get<std::uint64_t>();
    c.meta.best_epoch = t.at("best_epoch").get<std::size_t>();
    c.meta.step = t.at("step").get<std::size_t>();
    c.meta.eval_metric = t.at("eval_metric").get<std::string>();
    c.meta.best_metric = t.at("best_metric").is_null() ? -std::numeric_limits<double>::infinity()
                                                        : t.at("best_metric").get<double>();
    c.vocab = Vocabulary::from_tokens(json::parse(payload[1]).get<std::vector<std::string>>());
  } catch (const CheckpointError&) {
    throw;
  } catch (const std::exception& e) {
    throw CheckpointError(source + ": bad metadata: " + e.what());
  }
  if (fnv1a64(model_config_json(c.model)) != digest) {
    throw CheckpointError(source + ": config digest mismatch");
  }
  c.tensors = parse_tensors(payload[2], source);
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError(path.string() + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw CheckpointError(path.string() + ": " + ec.message());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_checkpoint(buffer.str(), path.string());
}

void load_parameters(const Checkpoint& ckpt, ParameterStore& params) {
  auto& entries = params.entries();
  if (entries.size() != ckpt.tensors.size()) {
    throw CheckpointError("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                          " tensors, model expects " + std::to_string(entries.size()));
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const StoredTensor& t = ckpt.tensors[i];
    if (t.name != entries[i].first) {
      throw CheckpointError("tensor " + std::to_string(i) + " is '" + t.name + "', model expects '" +
                            entries[i].first + "'");
    }
    if (t.shape != entries[i].second.shape()) {
      throw CheckpointError("tensor '" + t.name + "' has shape " + shape_str(t.shape) +
                            ", model expects " + shape_str(entries[i].second.shape()));
    }
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto dst = entries[i].second.mutable_data();
    std::copy(ckpt.tensors[i].values.begin(), ckpt.tensors[i].values.end(), dst.begin());
  }
}

}  // namespace legalnlp
