#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "legalnlp/model_config.hpp"

namespace legalnlp {

struct TrainConfig {
  double learning_rate = 5e-5;
  std::size_t batch_size = 16;
  // Exactly one of the two budgets is set.
  std::optional<std::size_t> max_steps;
  std::optional<std::size_t> n_epochs;
  double dropout_rate = 0.1;
  double weight_decay = 0.0;
  // Unset means 10% of the total step budget.
  std::optional<std::size_t> warmup_steps;
  std::size_t patience = 3;
  std::uint64_t seed = 0;
  std::string optimizer = "adam";
  double grad_clip = 1.0;
  std::string eval_metric = "macro_f1";

  void validate() const;
  /// Total optimizer steps given the number of batches per epoch.
  std::size_t total_steps(std::size_t batches_per_epoch) const;
  std::size_t resolved_warmup(std::size_t total) const;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Everything one train-* invocation needs.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  std::size_t min_freq = 1;
  double val_fraction = 0.2;

  void validate() const;
};

/// Defaults for a task: NER lr 5e-5 / batch 16 / 20000 steps / dropout 0.1;
/// NLI lr 2e-5 / batch 4 / 20 epochs / weight decay 0.01.
RunConfig default_run_config(TaskKind task);

/// `key = value` lines; `#` starts a comment. `task` must come first and
/// selects the defaults the remaining keys override.
RunConfig parse_run_config(const std::string& text, const std::string& source);
RunConfig load_run_config(const std::filesystem::path& path);
std::string format_run_config(const RunConfig& config);

}  // namespace legalnlp
