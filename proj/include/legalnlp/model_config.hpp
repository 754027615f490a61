#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace legalnlp {

enum class TaskKind { kNer, kNli };

std::string task_name(TaskKind task);
TaskKind parse_task(const std::string& name);

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 256;
  std::size_t max_positions = 128;
  std::size_t n_segments = 2;
  double dropout_rate = 0.1;

  void validate() const;
  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct CnnConfig {
  std::size_t vocab_size = 0;
  std::size_t d_embed = 64;
  std::vector<std::size_t> filter_widths = {2, 3, 4};
  std::size_t n_filters_per_width = 32;
  std::size_t d_out = 96;

  void validate() const;
  std::size_t max_width() const;
  std::size_t pooled_width() const { return filter_widths.size() * n_filters_per_width; }
  friend bool operator==(const CnnConfig&, const CnnConfig&) = default;
};

struct HeadConfig {
  std::size_t n_classes = 3;
  double dropout_rate = 0.1;

  friend bool operator==(const HeadConfig&, const HeadConfig&) = default;
};

// All architecture dimensions of one model. The CNN part is unused for NER.
struct ModelConfig {
  TaskKind task = TaskKind::kNli;
  EncoderConfig encoder;
  CnnConfig cnn;
  HeadConfig head;
  std::size_t max_len = 128;
  std::string pooling = "cls";

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace legalnlp
