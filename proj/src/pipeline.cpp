#include "legalnlp/pipeline.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"

namespace legalnlp {

namespace {

std::vector<std::string> normalized(const std::vector<std::string>& tokens) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(normalize_token(t));
  return out;
}

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

template <typename Fn>
void for_each_batch(std::size_t n, Fn&& fn) {
  const std::vector<std::size_t> order = all_indices(n);
  for (std::size_t begin = 0; begin < n; begin += kEvalBatchSize) {
    const std::size_t end = std::min(n, begin + kEvalBatchSize);
    fn(std::span<const std::size_t>(order.data() + begin, end - begin));
  }
}

void check_labels(const Checkpoint& ckpt, TaskKind task, const std::vector<std::string>& expected) {
  if (ckpt.model.task != task) {
    throw CheckpointError("checkpoint holds a " + task_name(ckpt.model.task) + " model, expected " +
                          task_name(task));
  }
  if (ckpt.labels != expected) throw CheckpointError("checkpoint label map does not match");
}

TrainingMeta meta_of(const TrainResult& result, const TrainConfig& train) {
  TrainingMeta meta;
  meta.seed = train.seed;
  meta.best_metric = result.best_metric;
  meta.best_epoch = result.best_epoch;
  meta.step = result.steps;
  meta.eval_metric = train.eval_metric;
  return meta;
}

}  // namespace

Vocabulary build_ner_vocab(const std::vector<NerRecord>& records, std::size_t min_freq) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& r : records) corpus.push_back(normalized(r.tokens));
  return Vocabulary::build(corpus, min_freq);
}

Vocabulary build_nli_vocab(const std::vector<NliRecord>& records, std::size_t min_freq) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& r : records) {
    corpus.push_back(tokenize(r.premise));
    corpus.push_back(tokenize(r.hypothesis));
  }
  return Vocabulary::build(corpus, min_freq);
}

NerData encode_ner(const std::vector<NerRecord>& records, const Vocabulary& vocab,
                   std::size_t max_len) {
  NerData data;
  for (const auto& r : records) {
    const std::vector<std::string> tokens = normalized(r.tokens);
    EncodedRow row = encode_sequence(tokens, vocab, max_len);
    data.labels.push_back(labels_to_ids(r.ner_tags, bio_labels(), row.valid_len));
    data.gold.push_back(extract_spans(repair_bio(r.ner_tags)));
    data.rows.push_back(std::move(row));
  }
  return data;
}

NliData encode_nli(const std::vector<NliRecord>& records, const Vocabulary& vocab,
                   std::size_t max_len) {
  NliData data;
  for (const auto& r : records) {
    data.rows.push_back(encode_pair(r.premise, r.hypothesis, vocab, max_len));
    data.labels.push_back(static_cast<int>(r.label));
    data.legal_acts.push_back(r.legal_act);
  }
  return data;
}

TokenBatch gather_batch(const std::vector<EncodedRow>& rows, std::span<const std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("gather_batch: no indices");
  std::size_t cols = 0;
  for (std::size_t i : indices) cols = std::max(cols, rows.at(i).valid_len);
  std::vector<EncodedRow> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) {
    const EncodedRow& src = rows[i];
    EncodedRow r;
    r.valid_len = src.valid_len;
    r.ids.assign(src.ids.begin(), src.ids.begin() + static_cast<std::ptrdiff_t>(cols));
    r.mask.assign(src.mask.begin(), src.mask.begin() + static_cast<std::ptrdiff_t>(cols));
    r.segments.assign(src.segments.begin(), src.segments.begin() + static_cast<std::ptrdiff_t>(cols));
    picked.push_back(std::move(r));
  }
  return TokenBatch::from_rows(picked);
}

std::vector<std::vector<EntitySpan>> predict_ner_spans(const NerModel& model,
                                                       const std::vector<EncodedRow>& rows) {
  std::vector<std::vector<EntitySpan>> out;
  for_each_batch(rows.size(), [&](std::span<const std::size_t> idx) {
    for (const auto& tags : model.predict(gather_batch(rows, idx))) {
      out.push_back(extract_spans(tags));
    }
  });
  return out;
}

std::vector<int> predict_nli_labels(const NliModel& model, const std::vector<EncodedRow>& rows) {
  std::vector<int> out;
  for_each_batch(rows.size(), [&](std::span<const std::size_t> idx) {
    for (const auto& p : model.predict(gather_batch(rows, idx))) {
      out.push_back(static_cast<int>(p.label));
    }
  });
  return out;
}

EvalReport evaluate_ner(const NerModel& model, const NerData& data) {
  return entity_f1_strict(predict_ner_spans(model, data.rows), data.gold);
}

EvalReport evaluate_nli(const NliModel& model, const NliData& data, bool split_by_domain) {
  const std::vector<int> preds = predict_nli_labels(model, data.rows);
  if (split_by_domain) {
    return domain_split_eval(data.legal_acts, preds, data.labels, kNliClasses, nli_label_names());
  }
  return macro_f1(preds, data.labels, kNliClasses, nli_label_names());
}

Tensor NerTask::batch_loss(std::span<const std::size_t> indices, const ForwardContext& ctx) {
  const TokenBatch batch = gather_batch(train_.rows, indices);
  std::vector<int> targets(batch.rows * batch.cols, kIgnoreIndex);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    const auto& labels = train_.labels[indices[r]];
    std::copy(labels.begin(), labels.end(), targets.begin() + static_cast<std::ptrdiff_t>(r * batch.cols));
  }
  const Tensor logits = model_.forward(batch, ctx);
  return cross_entropy_mean(reshape(logits, {batch.rows * batch.cols, kBioLabelCount}), targets);
}

Tensor NliTask::batch_loss(std::span<const std::size_t> indices, const ForwardContext& ctx) {
  const TokenBatch batch = gather_batch(train_.rows, indices);
  std::vector<int> targets;
  for (std::size_t i : indices) targets.push_back(train_.labels[i]);
  return cross_entropy_mean(model_.forward(batch, ctx), targets);
}

ModelConfig resolved_model_config(const RunConfig& config, const Vocabulary& vocab) {
  ModelConfig m = config.model;
  m.encoder.vocab_size = vocab.size();
  m.cnn.vocab_size = m.task == TaskKind::kNli ? vocab.size() : 0;
  m.encoder.dropout_rate = config.train.dropout_rate;
  m.head.dropout_rate = config.train.dropout_rate;
  return m;
}

NerRun train_ner(const RunConfig& config, const std::vector<NerRecord>& train,
                 const std::vector<NerRecord>& val, const EpochCallback& on_epoch,
                 const StopCondition& stop_when) {
  if (config.model.task != TaskKind::kNer) throw std::invalid_argument("train_ner: config task is not ner");
  config.validate();
  Vocabulary vocab = build_ner_vocab(train, config.min_freq);
  const ModelConfig model_config = resolved_model_config(config, vocab);
  const NerData train_data = encode_ner(train, vocab, model_config.max_len);
  const NerData val_data = encode_ner(val, vocab, model_config.max_len);
  NerModel model(model_config, config.train.seed);
  NerTask task(model, train_data, val_data);
  TrainResult result = train_loop(task, config.train, on_epoch, stop_when);
  return NerRun{std::move(vocab), std::move(model), std::move(result)};
}

NliRun train_nli(const RunConfig& config, const std::vector<NliRecord>& train,
                 const std::vector<NliRecord>& val, const EpochCallback& on_epoch,
                 const StopCondition& stop_when) {
  if (config.model.task != TaskKind::kNli) throw std::invalid_argument("train_nli: config task is not nli");
  config.validate();
  Vocabulary vocab = build_nli_vocab(train, config.min_freq);
  const ModelConfig model_config = resolved_model_config(config, vocab);
  const NliData train_data = encode_nli(train, vocab, model_config.max_len);
  const NliData val_data = encode_nli(val, vocab, model_config.max_len);
  NliModel model(model_config, config.train.seed);
  NliTask task(model, train_data, val_data);
  TrainResult result = train_loop(task, config.train, on_epoch, stop_when);
  return NliRun{std::move(vocab), std::move(model), std::move(result)};
}

Checkpoint to_checkpoint(const NerRun& run, const TrainConfig& train) {
  return make_checkpoint(run.model.config(), run.vocab, bio_labels(), meta_of(run.result, train),
                         run.model.parameters());
}

Checkpoint to_checkpoint(const NliRun& run, const TrainConfig& train) {
  return make_checkpoint(run.model.config(), run.vocab, nli_label_names(),
                         meta_of(run.result, train), run.model.parameters());
}

NerModel ner_model_from(const Checkpoint& ckpt) {
  check_labels(ckpt, TaskKind::kNer, bio_labels());
  NerModel model(ckpt.model, ckpt.meta.seed);
  load_parameters(ckpt, model.parameters());
  return model;
}

NliModel nli_model_from(const Checkpoint& ckpt) {
  check_labels(ckpt, TaskKind::kNli, nli_label_names());
  NliModel model(ckpt.model, ckpt.meta.seed);
  load_parameters(ckpt, model.parameters());
  return model;
}

std::string history_jsonl(const std::vector<EpochRecord>& history) {
  std::string out;
  for (const auto& r : history) {
    nlohmann::json j = {{"epoch", r.epoch},
                        {"step", r.step},
                        {"train_loss", r.train_loss},
                        {"val_metric", r.val_metric},
                        {"learning_rate", r.learning_rate},
                        {"improved", r.improved}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace legalnlp
