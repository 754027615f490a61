#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "legalnlp/checkpoint.hpp"
#include "legalnlp/dataset.hpp"
#include "legalnlp/metrics.hpp"
#include "legalnlp/ner.hpp"
#include "legalnlp/nli_model.hpp"
#include "legalnlp/run_config.hpp"
#include "legalnlp/trainer.hpp"
#include "legalnlp/vocab.hpp"

namespace legalnlp {

inline constexpr std::size_t kEvalBatchSize = 32;

// Encoded NER sentences. labels[i] covers the row's valid positions;
// gold[i] comes from the full (untruncated, repaired) tag sequence.
struct NerData {
  std::vector<EncodedRow> rows;
  std::vector<std::vector<int>> labels;
  std::vector<std::vector<EntitySpan>> gold;

  std::size_t size() const { return rows.size(); }
};

struct NliData {
  std::vector<EncodedRow> rows;
  std::vector<int> labels;
  std::vector<std::string> legal_acts;

  std::size_t size() const { return rows.size(); }
};

Vocabulary build_ner_vocab(const std::vector<NerRecord>& records, std::size_t min_freq);
Vocabulary build_nli_vocab(const std::vector<NliRecord>& records, std::size_t min_freq);

NerData encode_ner(const std::vector<NerRecord>& records, const Vocabulary& vocab,
                   std::size_t max_len);
NliData encode_nli(const std::vector<NliRecord>& records, const Vocabulary& vocab,
                   std::size_t max_len);

/// Rows at `indices`, cut to the longest valid length among them.
TokenBatch gather_batch(const std::vector<EncodedRow>& rows, std::span<const std::size_t> indices);

std::vector<std::vector<EntitySpan>> predict_ner_spans(const NerModel& model,
                                                       const std::vector<EncodedRow>& rows);
std::vector<int> predict_nli_labels(const NliModel& model, const std::vector<EncodedRow>& rows);

EvalReport evaluate_ner(const NerModel& model, const NerData& data);
/// Per-domain sub-reports when `split_by_domain`; every example then needs a legal_act.
EvalReport evaluate_nli(const NliModel& model, const NliData& data, bool split_by_domain);

class NerTask : public TrainTask {
 public:
  NerTask(NerModel& model, const NerData& train, const NerData& val)
      : model_(model), train_(train), val_(val) {}

  ParameterStore& parameters() override { return model_.parameters(); }
  std::size_t train_size() const override { return train_.size(); }
  std::size_t validation_size() const override { return val_.size(); }
  Tensor batch_loss(std::span<const std::size_t> indices, const ForwardContext& ctx) override;
  double validation_metric() override { return evaluate_ner(model_, val_).micro_f1; }

 private:
  NerModel& model_;
  const NerData& train_;
  const NerData& val_;
};

class NliTask : public TrainTask {
 public:
  NliTask(NliModel& model, const NliData& train, const NliData& val)
      : model_(model), train_(train), val_(val) {}

  ParameterStore& parameters() override { return model_.parameters(); }
  std::size_t train_size() const override { return train_.size(); }
  std::size_t validation_size() const override { return val_.size(); }
  Tensor batch_loss(std::span<const std::size_t> indices, const ForwardContext& ctx) override;
  double validation_metric() override { return evaluate_nli(model_, val_, false).macro_f1; }

 private:
  NliModel& model_;
  const NliData& train_;
  const NliData& val_;
};

/// Model config for a run whose vocabulary is already built.
ModelConfig resolved_model_config(const RunConfig& config, const Vocabulary& vocab);

struct NerRun {
  Vocabulary vocab;
  NerModel model;
  TrainResult result;
};

struct NliRun {
  Vocabulary vocab;
  NliModel model;
  TrainResult result;
};

/// Builds the vocabulary from `train`, initializes the model from the run
/// seed and trains with validation on `val`.
NerRun train_ner(const RunConfig& config, const std::vector<NerRecord>& train,
                 const std::vector<NerRecord>& val, const EpochCallback& on_epoch = {},
                 const StopCondition& stop_when = {});
NliRun train_nli(const RunConfig& config, const std::vector<NliRecord>& train,
                 const std::vector<NliRecord>& val, const EpochCallback& on_epoch = {},
                 const StopCondition& stop_when = {});

Checkpoint to_checkpoint(const NerRun& run, const TrainConfig& train);
Checkpoint to_checkpoint(const NliRun& run, const TrainConfig& train);

/// Rebuilds a model from a checkpoint; throws CheckpointError when the task
/// or label map does not match.
NerModel ner_model_from(const Checkpoint& ckpt);
NliModel nli_model_from(const Checkpoint& ckpt);

/// One JSON object per epoch.
std::string history_jsonl(const std::vector<EpochRecord>& history);

}  // namespace legalnlp
