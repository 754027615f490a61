#include "legalnlp/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <algorithm>
#include <sstream>

#include "CLI11.hpp"
#include "legalnlp/pipeline.hpp"

namespace legalnlp {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw std::runtime_error(path.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

fs::path history_path(const fs::path& checkpoint) {
  fs::path p = checkpoint;
  p += ".history.jsonl";
  return p;
}

struct TrainArgs {
  std::string config;
  std::string data;
  std::string val;
  std::string out;
  bool quiet = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string json;
  bool split_by_domain = false;
};

struct PredictArgs {
  std::string checkpoint;
  std::string input;
  std::string output;
};

RunConfig load_task_config(const std::string& path, TaskKind expected) {
  RunConfig config = load_run_config(path);
  if (config.model.task != expected) {
    throw DataError(path, 1, "config is for task '" + task_name(config.model.task) +
                                 "', this command trains '" + task_name(expected) + "'");
  }
  return config;
}

EpochCallback progress(std::ostream& err, bool quiet, const std::string& metric) {
  if (quiet) return {};
  return [&err, metric](const EpochRecord& r) {
    err << "epoch " << r.epoch << " step " << r.step << " loss " << std::setprecision(6)
        << r.train_loss << " " << metric << " " << r.val_metric << (r.improved ? " *" : "")
        << '\n';
  };
}

template <typename Record>
std::pair<std::vector<Record>, std::vector<Record>> train_val(std::vector<Record> train,
                                                              const std::string& val_path,
                                                              const RunConfig& config,
                                                              std::vector<Record> (*load)(const fs::path&)) {
  if (!val_path.empty()) return {std::move(train), load(val_path)};
  return split_train_val(train, config.val_fraction, config.train.seed);
}

void finish_training(const Checkpoint& ckpt, const TrainResult& result, const TrainArgs& args,
                     std::ostream& out) {
  save_checkpoint(ckpt, args.out);
  write_file(history_path(args.out), history_jsonl(result.history));
  out << "best " << ckpt.meta.eval_metric << " " << std::setprecision(6) << result.best_metric
      << " at epoch " << result.best_epoch << " (" << result.steps << " steps"
      << (result.stop_reason == StopReason::kPatience ? ", early stop" : "") << ")\n";
  out << "checkpoint " << args.out << '\n';
  out << "history " << history_path(args.out).string() << '\n';
}

void cmd_train_ner(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_task_config(args.config, TaskKind::kNer);
  auto [train, val] = train_val(load_ner_dataset(args.data), args.val, config, &load_ner_dataset);
  const NerRun run = train_ner(config, train, val, progress(err, args.quiet, config.train.eval_metric));
  finish_training(to_checkpoint(run, config.train), run.result, args, out);
}

void cmd_train_nli(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_task_config(args.config, TaskKind::kNli);
  auto [train, val] = train_val(load_nli_dataset(args.data), args.val, config, &load_nli_dataset);
  const NliRun run = train_nli(config, train, val, progress(err, args.quiet, config.train.eval_metric));
  finish_training(to_checkpoint(run, config.train), run.result, args, out);
}

void cmd_eval(const EvalArgs& args, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  EvalReport report;
  if (ckpt.model.task == TaskKind::kNer) {
    if (args.split_by_domain) throw std::invalid_argument("--split-by-domain applies to NLI data only");
    const NerModel model = ner_model_from(ckpt);
    report = evaluate_ner(model, encode_ner(load_ner_dataset(args.data), ckpt.vocab, ckpt.model.max_len));
  } else {
    const std::vector<NliRecord> records = load_nli_dataset(args.data);
    const bool all_tagged = std::all_of(records.begin(), records.end(),
                                        [](const NliRecord& r) { return !r.legal_act.empty(); });
    if (args.split_by_domain && !all_tagged) {
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].legal_act.empty()) {
          throw std::invalid_argument(args.data + ": record " + std::to_string(i + 1) +
                                      " has no legal_act");
        }
      }
    }
    const NliModel model = nli_model_from(ckpt);
    report = evaluate_nli(model, encode_nli(records, ckpt.vocab, ckpt.model.max_len),
                          all_tagged && !records.empty());
  }
  if (!args.json.empty()) write_file(args.json, report_to_json(report) + "\n");
  out << format_report(report);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path, 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

bool blank(const std::string& s) { return s.find_first_not_of(" \t") == std::string::npos; }

std::string predict_ner(const Checkpoint& ckpt, const std::string& input) {
  const NerModel model = ner_model_from(ckpt);
  std::vector<std::vector<std::string>> sentences;
  for (const auto& line : read_lines(input)) {
    if (blank(line)) continue;
    std::istringstream words(line);
    std::vector<std::string> tokens;
    std::string w;
    while (words >> w) tokens.push_back(w);
    sentences.push_back(std::move(tokens));
  }
  std::vector<EncodedRow> rows;
  for (const auto& tokens : sentences) {
    std::vector<std::string> norm;
    for (const auto& t : tokens) norm.push_back(normalize_token(t));
    rows.push_back(encode_sequence(norm, ckpt.vocab, ckpt.model.max_len));
  }
  std::ostringstream out;
  const auto spans = rows.empty() ? std::vector<std::vector<EntitySpan>>{}
                                  : predict_ner_spans(model, rows);
  for (std::size_t s = 0; s < spans.size(); ++s) {
    if (s > 0) out << '\n';
    for (const EntitySpan& span : spans[s]) {
      out << span.start << ' ' << span.end << ' ' << entity_type_name(span.type);
      for (std::size_t i = span.start; i < span.end; ++i) out << ' ' << sentences[s][i];
      out << '\n';
    }
  }
  return out.str();
}

std::string predict_nli(const Checkpoint& ckpt, const std::string& input) {
  const NliModel model = nli_model_from(ckpt);
  std::vector<EncodedRow> rows;
  const std::vector<std::string> lines = read_lines(input);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto tab = lines[i].find('\t');
    if (tab == std::string::npos) throw DataError(input, i + 1, "expected premise<TAB>hypothesis");
    const std::string premise = lines[i].substr(0, tab);
    const std::string hypothesis = lines[i].substr(tab + 1);
    if (blank(premise)) throw DataError(input, i + 1, "empty premise");
    if (blank(hypothesis)) throw DataError(input, i + 1, "empty hypothesis");
    rows.push_back(encode_pair(premise, hypothesis, ckpt.vocab, ckpt.model.max_len));
  }
  std::ostringstream out;
  if (!rows.empty()) {
    for (int label : predict_nli_labels(model, rows)) {
      out << nli_label_name(static_cast<NliLabel>(label)) << '\n';
    }
  }
  return out.str();
}

void cmd_predict(const PredictArgs& args, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(args.checkpoint);
  const std::string text = ckpt.model.task == TaskKind::kNer ? predict_ner(ckpt, args.input)
                                                             : predict_nli(ckpt, args.input);
  if (args.output.empty()) {
    out << text;
  } else {
    write_file(args.output, text);
  }
}

void add_train_options(CLI::App* cmd, TrainArgs& args) {
  cmd->add_option("--config", args.config, "run-config file")->required();
  cmd->add_option("--data", args.data, "training data")->required();
  cmd->add_option("--val", args.val, "validation data (default: split off --data)");
  cmd->add_option("--out", args.out, "checkpoint path; history goes to <out>.history.jsonl")
      ->required();
  cmd->add_flag("--quiet", args.quiet, "no per-epoch progress on stderr");
}

}  // namespace

int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err) {
  CLI::App app{"Legal NER / NLI models: training, evaluation and prediction", "legalnlp"};
  app.require_subcommand(1);
  TrainArgs ner_args, nli_args;
  EvalArgs eval_args;
  PredictArgs predict_args;

  add_train_options(app.add_subcommand("train-ner", "train the entity tagger"), ner_args);
  add_train_options(app.add_subcommand("train-nli", "train the premise/hypothesis classifier"),
                    nli_args);
  CLI::App* eval = app.add_subcommand("eval", "score a checkpoint on labelled data");
  eval->add_option("--checkpoint", eval_args.checkpoint)->required();
  eval->add_option("--data", eval_args.data)->required();
  eval->add_option("--json", eval_args.json, "also write the report as JSON");
  eval->add_flag("--split-by-domain", eval_args.split_by_domain,
                 "per-legal_act scores and their average (NLI)");
  CLI::App* predict = app.add_subcommand("predict", "label raw inputs");
  predict->add_option("--checkpoint", predict_args.checkpoint)->required();
  predict->add_option("--input", predict_args.input,
                      "NER: one whitespace-tokenized sentence per line; "
                      "NLI: premise<TAB>hypothesis per line")
      ->required();
  predict->add_option("--output", predict_args.output, "default: stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    const auto chosen = app.get_subcommands();
    out << (chosen.empty() ? app.help() : chosen.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("train-ner")) {
      cmd_train_ner(ner_args, out, err);
    } else if (app.got_subcommand("train-nli")) {
      cmd_train_nli(nli_args, out, err);
    } else if (app.got_subcommand("eval")) {
      cmd_eval(eval_args, out);
    } else {
      cmd_predict(predict_args, out);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv = {"legalnlp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace legalnlp
