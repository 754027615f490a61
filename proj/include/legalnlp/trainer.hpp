#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "legalnlp/nn.hpp"
#include "legalnlp/run_config.hpp"

namespace legalnlp {

// Non-finite loss during training.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t step, std::size_t batch)
      : std::runtime_error(what), step_(step), batch_(batch) {}
  std::size_t step() const { return step_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t step_;
  std::size_t batch_;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  std::size_t step = 0;   // optimizer steps completed so far
  double train_loss = 0.0;  // mean batch loss over the epoch
  double val_metric = 0.0;
  double learning_rate = 0.0;  // rate used by the epoch's last update
  bool improved = false;
};

enum class StopReason { kBudget, kPatience, kCondition };

struct TrainResult {
  std::vector<EpochRecord> history;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  StopReason stop_reason = StopReason::kBudget;
};

// What train_loop needs from a model + dataset pair.
class TrainTask {
 public:
  virtual ~TrainTask() = default;

  virtual ParameterStore& parameters() = 0;
  virtual std::size_t train_size() const = 0;
  virtual std::size_t validation_size() const = 0;
  /// Mean loss over the training examples at `indices`.
  virtual Tensor batch_loss(std::span<const std::size_t> indices, const ForwardContext& ctx) = 0;
  /// Higher is better; computed in eval mode.
  virtual double validation_metric() = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;
/// Checked after each epoch's evaluation; true ends training.
using StopCondition = std::function<bool(const EpochRecord&)>;

/// Seeded shuffle each epoch, Adam with the warmup/decay schedule and global
/// norm clipping per batch, validation after every epoch. Stops after
/// `patience` evaluations without improvement or when the step/epoch budget
/// is spent, then restores the best parameters.
TrainResult train_loop(TrainTask& task, const TrainConfig& config,
                       const EpochCallback& on_epoch = {}, const StopCondition& stop_when = {});

}  // namespace legalnlp
