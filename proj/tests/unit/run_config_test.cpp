#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "legalnlp/dataset.hpp"
#include "legalnlp/run_config.hpp"
#include "toy.hpp"

using namespace legalnlp;
namespace fs = std::filesystem;

namespace {

std::size_t error_line(const std::string& text) {
  try {
    parse_run_config(text, "cfg");
  } catch (const DataError& e) {
    return e.line();
  }
  return 0;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

TEST_CASE("shipped defaults") {
  const fs::path dir = fs::path(LEGALNLP_SOURCE_DIR) / "configs";
  const RunConfig ner = load_run_config(dir / "ner_default.conf");
  CHECK(ner.model.task == TaskKind::kNer);
  CHECK(ner.train.learning_rate == 5e-5);
  CHECK(ner.train.batch_size == 16);
  CHECK(ner.train.max_steps == std::optional<std::size_t>(20000));
  CHECK_FALSE(ner.train.n_epochs);
  CHECK(ner.train.dropout_rate == 0.1);
  CHECK(ner.train.optimizer == "adam");
  CHECK(ner.train.eval_metric == "strict_span_f1");
  CHECK(ner.model.head.n_classes == 9);

  const RunConfig nli = load_run_config(dir / "nli_default.conf");
  CHECK(nli.model.task == TaskKind::kNli);
  CHECK(nli.train.learning_rate == 2e-5);
  CHECK(nli.train.batch_size == 4);
  CHECK(nli.train.n_epochs == std::optional<std::size_t>(20));
  CHECK_FALSE(nli.train.max_steps);
  CHECK(nli.train.weight_decay == 0.01);
  CHECK(nli.train.eval_metric == "macro_f1");
  CHECK(nli.model.cnn.filter_widths == std::vector<std::size_t>{2, 3, 4});

  CHECK(default_run_config(TaskKind::kNer).train == ner.train);
  CHECK(default_run_config(TaskKind::kNli).train == nli.train);
}

TEST_CASE("format then parse round-trips") {
  for (TaskKind task : {TaskKind::kNer, TaskKind::kNli}) {
    RunConfig c = default_run_config(task);
    c.train.warmup_steps = 7;
    c.train.seed = 123456789012345ull;
    c.train.learning_rate = 3.3e-4;
    const RunConfig back = parse_run_config(format_run_config(c), "x");
    CHECK(back.train == c.train);
    CHECK(back.model == c.model);
    CHECK(back.val_fraction == c.val_fraction);
  }
}

TEST_CASE("budgets and dropout propagation") {
  const RunConfig c = parse_run_config("task = nli\nmax_steps = 50\ndropout_rate = 0.3\n", "x");
  CHECK(c.train.max_steps == std::optional<std::size_t>(50));
  CHECK_FALSE(c.train.n_epochs);
  CHECK(c.model.encoder.dropout_rate == 0.3);
  CHECK(c.model.head.dropout_rate == 0.3);
  CHECK(error_line("task = nli\nmax_steps = 50\nn_epochs = 2\n") == 3);
}

TEST_CASE("parse errors carry the line") {
  CHECK(error_line("# header\ntask = ner\nlearning_rate 5\n") == 3);
  CHECK(error_line("task = ner\nbatch_size = 1\nbatch_size = 2\n") == 3);
  CHECK(error_line("task = ner\n\nbogus = 1\n") == 3);
  CHECK(error_line("learning_rate = 1\ntask = ner\n") == 1);
  CHECK(error_line("task = ner\ntask = nli\n") == 2);
  CHECK(error_line("task = tagging\n") == 1);
  CHECK(error_line("task = ner\nbatch_size = -1\n") == 2);
  CHECK(error_line("task = ner\nlearning_rate = 1e-3x\n") == 2);
  CHECK(error_line("task = ner\nlearning_rate =\n") == 2);
  CHECK(error_line("# nothing\n") == 1);
  CHECK(error_line("task = ner\nlearning_rate = 0\n") > 0);
  CHECK(error_line("task = ner\noptimizer = sgd\n") > 0);
  CHECK(error_line("task = ner\neval_metric = macro_f1\n") > 0);
  CHECK(error_line("task = nli\nd_model = 10\nn_heads = 4\n") > 0);
  CHECK_THROWS_AS(load_run_config("/no/such/config"), DataError);
}

TEST_CASE("mutated config lines fail at exactly that line") {
  const std::string base = format_run_config(default_run_config(TaskKind::kNli));
  const std::vector<std::string> lines = lines_of(base);
  Rng rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> mutated = lines;
    const std::size_t target = legalnlp::testing::uniform_int(rng, 1, lines.size() - 1);
    std::string& line = mutated[target];
    const auto eq = line.find('=');
    const std::string key = line.substr(0, eq - 1);
    switch (rng() % 4) {
      case 0: line.erase(eq, 1); break;
      case 1: line = "unknown_" + key + " = 1"; break;
      case 2: line = mutated[1]; break;  // duplicate key
      default: line = key + " = ?"; break;
    }
    std::size_t expected = target + 1;
    // Free-text keys parse anything; the bad value surfaces in the final validation.
    if (line == key + " = ?" && (key == "optimizer" || key == "eval_metric")) expected = lines.size();
    // Duplicating line 1 onto itself is harmless.
    if (target == 1 && mutated[target] == lines[1]) continue;
    CHECK(error_line(join(mutated)) == expected);
  }
}

TEST_CASE("train config helpers") {
  TrainConfig t;
  t.max_steps = 100;
  CHECK(t.total_steps(7) == 100);
  CHECK(t.resolved_warmup(100) == 10);
  t.warmup_steps = 100;
  CHECK_THROWS(t.resolved_warmup(100));
  TrainConfig e;
  e.max_steps.reset();
  e.n_epochs = 3;
  CHECK(e.total_steps(7) == 21);
  TrainConfig both = e;
  both.max_steps = 5;
  CHECK_THROWS(both.validate());
}
