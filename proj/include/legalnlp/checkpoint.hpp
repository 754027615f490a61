#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "legalnlp/model_config.hpp"
#include "legalnlp/nn.hpp"
#include "legalnlp/vocab.hpp"

namespace legalnlp {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  // -inf when the model was never evaluated.
  double best_metric = 0.0;
  std::size_t best_epoch = 0;
  std::size_t step = 0;
  std::string eval_metric;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<double> values;

  friend bool operator==(const StoredTensor&, const StoredTensor&) = default;
};

struct Checkpoint {
  ModelConfig model;
  Vocabulary vocab;
  std::vector<std::string> labels;
  TrainingMeta meta;
  std::vector<StoredTensor> tensors;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

/// Copies every parameter of `params` in registration order.
Checkpoint make_checkpoint(const ModelConfig& model, const Vocabulary& vocab,
                           std::vector<std::string> labels, const TrainingMeta& meta,
                           const ParameterStore& params);

/// Text header (magic, version, config digest, section table) followed by
/// meta/vocab/tensors sections, each with a length and FNV-1a checksum.
/// Tensor values are raw little-endian IEEE-754 doubles.
std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws CheckpointError on bad magic, version mismatch, truncation,
/// checksum or digest mismatch.
Checkpoint parse_checkpoint(std::string_view bytes, const std::string& source = "checkpoint");

/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params`. Names, order and shapes must match
/// exactly; nothing is written unless all of them do.
void load_parameters(const Checkpoint& ckpt, ParameterStore& params);

std::uint64_t fnv1a64(std::string_view bytes);
/// Canonical JSON text of a model config; its FNV-1a hash is the header digest.
std::string model_config_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view text);

}  // namespace legalnlp
