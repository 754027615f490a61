#include "legalnlp/run_config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "legalnlp/dataset.hpp"
#include "legalnlp/ner.hpp"

namespace legalnlp {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  if (max_steps.has_value() == n_epochs.has_value()) {
    throw std::invalid_argument("exactly one of max_steps / n_epochs must be set");
  }
  if (max_steps && *max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
  if (n_epochs && *n_epochs == 0) throw std::invalid_argument("n_epochs must be >= 1");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("dropout_rate outside [0, 1)");
  }
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be >= 0");
  if (optimizer != "adam") throw std::invalid_argument("unsupported optimizer '" + optimizer + "'");
  if (!(grad_clip > 0.0)) throw std::invalid_argument("grad_clip must be > 0");
  if (eval_metric != "macro_f1" && eval_metric != "strict_span_f1") {
    throw std::invalid_argument("eval_metric must be macro_f1 or strict_span_f1");
  }
}

std::size_t TrainConfig::total_steps(std::size_t batches_per_epoch) const {
  if (max_steps) return *max_steps;
  return *n_epochs * batches_per_epoch;
}

std::size_t TrainConfig::resolved_warmup(std::size_t total) const {
  const std::size_t warmup = warmup_steps ? *warmup_steps : total / 10;
  if (warmup >= total) {
    throw std::invalid_argument("warmup_steps (" + std::to_string(warmup) +
                                ") must be below the total step budget (" +
                                std::to_string(total) + ")");
  }
  return warmup;
}

void RunConfig::validate() const {
  train.validate();
  ModelConfig probe = model;
  probe.encoder.vocab_size = std::max<std::size_t>(probe.encoder.vocab_size, kReservedCount);
  probe.cnn.vocab_size = std::max<std::size_t>(probe.cnn.vocab_size, kReservedCount);
  probe.validate();
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must be in (0, 1)");
  }
  const std::string expected = model.task == TaskKind::kNer ? "strict_span_f1" : "macro_f1";
  if (train.eval_metric != expected) {
    throw std::invalid_argument(task_name(model.task) + " runs are scored with " + expected);
  }
}

RunConfig default_run_config(TaskKind task) {
  RunConfig c;
  c.model.task = task;
  if (task == TaskKind::kNer) {
    c.model.head.n_classes = kBioLabelCount;
    c.train.learning_rate = 5e-5;
    c.train.batch_size = 16;
    c.train.max_steps = 20000;
    c.train.dropout_rate = 0.1;
    c.train.weight_decay = 0.0;
    c.train.eval_metric = "strict_span_f1";
  } else {
    c.model.head.n_classes = kNliClasses;
    c.train.learning_rate = 2e-5;
    c.train.batch_size = 4;
    c.train.n_epochs = 20;
    c.train.dropout_rate = 0.1;
    c.train.weight_decay = 0.01;
    c.train.eval_metric = "macro_f1";
  }
  c.model.encoder.dropout_rate = c.train.dropout_rate;
  c.model.head.dropout_rate = c.train.dropout_rate;
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw std::invalid_argument("key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

std::vector<std::size_t> parse_list(const std::string& text, const std::string& key) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<std::size_t>(trim(item), key));
  return out;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::optional<RunConfig> config;
  std::set<std::string> seen;

  using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"learning_rate", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.learning_rate = parse_number<double>(v, k); }},
      {"batch_size", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.batch_size = parse_number<std::size_t>(v, k); }},
      {"max_steps", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.max_steps = parse_number<std::size_t>(v, k); }},
      {"n_epochs", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.n_epochs = parse_number<std::size_t>(v, k); }},
      {"dropout_rate", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.dropout_rate = parse_number<double>(v, k); }},
      {"weight_decay", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.weight_decay = parse_number<double>(v, k); }},
      {"warmup_steps", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.warmup_steps = parse_number<std::size_t>(v, k); }},
      {"patience", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.patience = parse_number<std::size_t>(v, k); }},
      {"seed", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.seed = parse_number<std::uint64_t>(v, k); }},
      {"optimizer", [](RunConfig& c, const std::string& v, const std::string&) { c.train.optimizer = v; }},
      {"grad_clip", [](RunConfig& c, const std::string& v, const std::string& k) { c.train.grad_clip = parse_number<double>(v, k); }},
      {"eval_metric", [](RunConfig& c, const std::string& v, const std::string&) { c.train.eval_metric = v; }},
      {"max_len", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.max_len = parse_number<std::size_t>(v, k); }},
      {"d_model", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.encoder.d_model = parse_number<std::size_t>(v, k); }},
      {"n_layers", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.encoder.n_layers = parse_number<std::size_t>(v, k); }},
      {"n_heads", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.encoder.n_heads = parse_number<std::size_t>(v, k); }},
      {"d_ff", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.encoder.d_ff = parse_number<std::size_t>(v, k); }},
      {"max_positions", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.encoder.max_positions = parse_number<std::size_t>(v, k); }},
      {"cnn_d_embed", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.cnn.d_embed = parse_number<std::size_t>(v, k); }},
      {"cnn_filter_widths", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.cnn.filter_widths = parse_list(v, k); }},
      {"cnn_n_filters", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.cnn.n_filters_per_width = parse_number<std::size_t>(v, k); }},
      {"cnn_d_out", [](RunConfig& c, const std::string& v, const std::string& k) { c.model.cnn.d_out = parse_number<std::size_t>(v, k); }},
      {"min_freq", [](RunConfig& c, const std::string& v, const std::string& k) { c.min_freq = parse_number<std::size_t>(v, k); }},
      {"val_fraction", [](RunConfig& c, const std::string& v, const std::string& k) { c.val_fraction = parse_number<double>(v, k); }},
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError(source, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) throw DataError(source, lineno, "empty value for '" + key + "'");
    if (!seen.insert(key).second) throw DataError(source, lineno, "duplicate key '" + key + "'");
    try {
      if (key == "task") {
        if (config) throw std::invalid_argument("'task' must be the first key");
        config = default_run_config(parse_task(value));
        continue;
      }
      if (!config) throw std::invalid_argument("'task' must be the first key");
      auto it = setters.find(key);
      if (it == setters.end()) throw std::invalid_argument("unknown key '" + key + "'");
      it->second(*config, value, key);
    } catch (const DataError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(source, lineno, e.what());
    }
  }
  if (!config) throw DataError(source, lineno, "no 'task' key");
  // A budget named in the file replaces the task default's budget.
  if (seen.contains("max_steps") && !seen.contains("n_epochs")) config->train.n_epochs.reset();
  if (seen.contains("n_epochs") && !seen.contains("max_steps")) config->train.max_steps.reset();
  config->model.encoder.dropout_rate = config->train.dropout_rate;
  config->model.head.dropout_rate = config->train.dropout_rate;
  try {
    config->validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(source, lineno, e.what());
  }
  return *config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string(), 0, "cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.string());
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "task = " << task_name(c.model.task) << '\n';
  out << "learning_rate = " << c.train.learning_rate << '\n';
  out << "batch_size = " << c.train.batch_size << '\n';
  if (c.train.max_steps) out << "max_steps = " << *c.train.max_steps << '\n';
  if (c.train.n_epochs) out << "n_epochs = " << *c.train.n_epochs << '\n';
  out << "dropout_rate = " << c.train.dropout_rate << '\n';
  out << "weight_decay = " << c.train.weight_decay << '\n';
  if (c.train.warmup_steps) out << "warmup_steps = " << *c.train.warmup_steps << '\n';
  out << "patience = " << c.train.patience << '\n';
  out << "seed = " << c.train.seed << '\n';
  out << "optimizer = " << c.train.optimizer << '\n';
  out << "grad_clip = " << c.train.grad_clip << '\n';
  out << "eval_metric = " << c.train.eval_metric << '\n';
  out << "max_len = " << c.model.max_len << '\n';
  out << "d_model = " << c.model.encoder.d_model << '\n';
  out << "n_layers = " << c.model.encoder.n_layers << '\n';
  out << "n_heads = " << c.model.encoder.n_heads << '\n';
  out << "d_ff = " << c.model.encoder.d_ff << '\n';
  out << "max_positions = " << c.model.encoder.max_positions << '\n';
  if (c.model.task == TaskKind::kNli) {
    out << "cnn_d_embed = " << c.model.cnn.d_embed << '\n';
    out << "cnn_filter_widths = ";
    for (std::size_t i = 0; i < c.model.cnn.filter_widths.size(); ++i)
      out << (i ? "," : "") << c.model.cnn.filter_widths[i];
    out << '\n';
    out << "cnn_n_filters = " << c.model.cnn.n_filters_per_width << '\n';
    out << "cnn_d_out = " << c.model.cnn.d_out << '\n';
  }
  out << "min_freq = " << c.min_freq << '\n';
  out << "val_fraction = " << c.val_fraction << '\n';
  return out.str();
}

}  // namespace legalnlp
