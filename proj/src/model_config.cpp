#include "legalnlp/model_config.hpp"

#include <algorithm>
#include <stdexcept>

namespace legalnlp {

std::string task_name(TaskKind task) { return task == TaskKind::kNer ? "ner" : "nli"; }

TaskKind parse_task(const std::string& name) {
  if (name == "ner") return TaskKind::kNer;
  if (name == "nli") return TaskKind::kNli;
  throw std::invalid_argument("unknown task '" + name + "' (expected ner or nli)");
}

void EncoderConfig::validate() const {
  if (vocab_size < 4) throw std::invalid_argument("encoder: vocab_size must be >= 4");
  if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0) {
    throw std::invalid_argument("encoder: d_model (" + std::to_string(d_model) +
                                ") must be a positive multiple of n_heads (" +
                                std::to_string(n_heads) + ")");
  }
  if (n_layers == 0) throw std::invalid_argument("encoder: n_layers must be >= 1");
  if (d_ff == 0) throw std::invalid_argument("encoder: d_ff must be >= 1");
  if (max_positions == 0) throw std::invalid_argument("encoder: max_positions must be >= 1");
  if (n_segments == 0) throw std::invalid_argument("encoder: n_segments must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("encoder: dropout_rate outside [0, 1)");
  }
}

void CnnConfig::validate() const {
  if (vocab_size < 4) throw std::invalid_argument("cnn: vocab_size must be >= 4");
  if (d_embed == 0 || d_out == 0) throw std::invalid_argument("cnn: zero-sized layer");
  if (filter_widths.empty()) throw std::invalid_argument("cnn: no filter widths");
  for (std::size_t w : filter_widths)
    if (w == 0) throw std::invalid_argument("cnn: filter width 0");
  if (n_filters_per_width == 0) throw std::invalid_argument("cnn: n_filters_per_width must be >= 1");
}

std::size_t CnnConfig::max_width() const {
  return *std::max_element(filter_widths.begin(), filter_widths.end());
}

void ModelConfig::validate() const {
  encoder.validate();
  if (task == TaskKind::kNli) cnn.validate();
  if (head.n_classes < 2) throw std::invalid_argument("head: n_classes must be >= 2");
  if (head.dropout_rate < 0.0 || head.dropout_rate >= 1.0) {
    throw std::invalid_argument("head: dropout_rate outside [0, 1)");
  }
  if (max_len == 0 || max_len > encoder.max_positions) {
    throw std::invalid_argument("max_len " + std::to_string(max_len) +
                                " must be in [1, max_positions=" +
                                std::to_string(encoder.max_positions) + "]");
  }
  if (task == TaskKind::kNli && max_len < 5) {
    throw std::invalid_argument("nli max_len must be >= 5");
  }
  if (pooling != "cls") throw std::invalid_argument("unsupported pooling '" + pooling + "'");
}

}  // namespace legalnlp
