#include "legalnlp/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "legalnlp/dataset.hpp"
#include "legalnlp/optim.hpp"

namespace legalnlp {

namespace {

constexpr std::uint64_t kDropoutStream = 0x9E3779B97F4A7C15ULL;

}  // namespace

TrainResult train_loop(TrainTask& task, const TrainConfig& config, const EpochCallback& on_epoch,
                       const StopCondition& stop_when) {
  config.validate();
  const std::size_t n = task.train_size();
  if (n == 0) throw std::invalid_argument("train_loop: empty training set");
  if (task.validation_size() == 0) throw std::invalid_argument("train_loop: empty validation set");

  const std::size_t batches_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total = config.total_steps(batches_per_epoch);
  const std::size_t warmup = config.resolved_warmup(total);

  ParameterStore& params = task.parameters();
  OptimizerState state = OptimizerState::for_parameters(params);
  Rng shuffle_rng(config.seed);
  Rng dropout_rng(config.seed ^ kDropoutStream);
  const ForwardContext ctx = ForwardContext::train(dropout_rng);

  TrainResult result;
  ParameterStore::Snapshot best = params.snapshot();
  std::size_t since_improvement = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; step < total; ++epoch) {
    const std::vector<std::size_t> order = seeded_permutation(n, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    double lr = 0.0;
    for (std::size_t b = 0; b < batches_per_epoch && step < total; ++b) {
      const std::size_t begin = b * config.batch_size;
      const std::size_t end = std::min(n, begin + config.batch_size);
      const std::span<const std::size_t> indices(order.data() + begin, end - begin);

      params.zero_grad();
      const Tensor loss = task.batch_loss(indices, ctx);
      const double value = loss.item();
      if (!std::isfinite(value)) {
        throw TrainingError("non-finite loss " + std::to_string(value) + " at step " +
                                std::to_string(step) + " (epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(b) + ")",
                            step, b);
      }
      backward(loss);
      clip_grad_norm(params, config.grad_clip);
      lr = lr_schedule(step, config.learning_rate, warmup, total);
      adam_step(params, state, lr, config.weight_decay);
      ++step;
      loss_sum += value;
      ++loss_count;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.step = step;
    record.train_loss = loss_sum / static_cast<double>(loss_count);
    record.val_metric = task.validation_metric();
    record.learning_rate = lr;
    record.improved = record.val_metric > result.best_metric;
    if (record.improved) {
      result.best_metric = record.val_metric;
      result.best_epoch = epoch;
      best = params.snapshot();
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record);
    if (since_improvement >= config.patience) {
      result.stop_reason = StopReason::kPatience;
      break;
    }
    if (stop_when && stop_when(record)) {
      result.stop_reason = StopReason::kCondition;
      break;
    }
  }
  result.steps = step;
  params.restore(best);
  params.zero_grad();
  return result;
}

}  // namespace legalnlp
