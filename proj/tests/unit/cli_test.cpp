#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "legalnlp/cli.hpp"
#include "legalnlp/dataset.hpp"
#include "legalnlp/synthetic.hpp"

using namespace legalnlp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Emptied once per process so cached checkpoints never outlive a build.
fs::path dir() {
  static const fs::path d = [] {
    const fs::path p = fs::path(LEGALNLP_TEST_WORKDIR) / "cli_test";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return d;
}

std::string write(const std::string& name, const std::string& text) {
  const fs::path p = dir() / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string small_config(const std::string& task) {
  std::string text = "task = " + task +
                     "\nlearning_rate = 1e-3\nbatch_size = 4\nseed = 7\nmax_len = 32\n"
                     "d_model = 16\nn_layers = 1\nn_heads = 2\nd_ff = 32\nmax_positions = 32\n";
  if (task == "nli") return text + "n_epochs = 2\ncnn_d_embed = 8\ncnn_n_filters = 2\ncnn_d_out = 8\n";
  return text + "max_steps = 6\n";
}

std::string ner_data() {
  std::ostringstream s;
  write_ner_dataset(s, synthetic_ner(10, 3));
  return write("ner.jsonl", s.str());
}

std::string nli_data(bool with_domains) {
  auto records = synthetic_nli(3, 3);
  if (!with_domains) records[1].legal_act.clear();
  std::ostringstream s;
  write_nli_jsonl(s, records);
  return write(with_domains ? "nli.jsonl" : "nli_partial.jsonl", s.str());
}

// Trains once per task per process.
std::string trained(const std::string& task) {
  const fs::path ckpt = dir() / (task + ".ckpt");
  if (!fs::exists(ckpt)) {
    const Run r = cli({"train-" + task, "--config", write(task + ".conf", small_config(task)), "--data",
                       task == "ner" ? ner_data() : nli_data(true), "--out", ckpt.string(), "--quiet"});
    REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  }
  return ckpt.string();
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(cli({}).code == kExitUsage);
  const Run unknown = cli({"train-ner", "--bogus"});
  CHECK(unknown.code == kExitUsage);
  CHECK_FALSE(unknown.err.empty());
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"eval", "--data", "x"}).code == kExitUsage);
}

TEST_CASE("help exits 0") {
  const Run top = cli({"--help"});
  CHECK(top.code == kExitOk);
  CHECK(contains(top.out, "train-ner"));
  const Run sub = cli({"predict", "--help"});
  CHECK(sub.code == kExitOk);
  CHECK(contains(sub.out, "--checkpoint"));
}

TEST_CASE("runtime failures exit 1 with the location") {
  const std::string conf = write("ner_fail.conf", small_config("ner"));
  const Run missing = cli({"train-ner", "--config", conf, "--data", (dir() / "nope.txt").string(),
                           "--out", (dir() / "never.ckpt").string()});
  CHECK(missing.code == kExitFailure);
  CHECK(contains(missing.err, "nope.txt"));
  CHECK_FALSE(fs::exists(dir() / "never.ckpt"));

  const std::string bad = write("bad.jsonl",
                                  "{\"tokens\":[\"a\"],\"ner_tags\":[\"O\"]}\n"
                                  "{\"tokens\":[\"a\",\"b\"],\"ner_tags\":[\"O\"]}\n");
  const Run malformed = cli({"train-ner", "--config", conf, "--data", bad, "--out",
                             (dir() / "never.ckpt").string()});
  CHECK(malformed.code == kExitFailure);
  CHECK(contains(malformed.err, bad + ":2"));
  CHECK_FALSE(fs::exists(dir() / "never.ckpt"));

  const std::string bad_conf = write("bad.conf", "task = ner\nbatch_size = zero\n");
  const Run conf_err = cli({"train-ner", "--config", bad_conf, "--data", ner_data(), "--out",
                            (dir() / "never.ckpt").string()});
  CHECK(conf_err.code == kExitFailure);
  CHECK(contains(conf_err.err, bad_conf + ":2"));

  const Run wrong_task = cli({"train-nli", "--config", conf, "--data", nli_data(true), "--out",
                              (dir() / "never.ckpt").string()});
  CHECK(wrong_task.code == kExitFailure);
  CHECK_FALSE(fs::exists(dir() / "never.ckpt"));
}

TEST_CASE("training writes the checkpoint and history") {
  for (const std::string task : {"ner", "nli"}) {
    const std::string ckpt = trained(task);
    CHECK(fs::exists(ckpt));
    const std::string history = read(ckpt + ".history.jsonl");
    std::istringstream lines(history);
    std::size_t n = 0;
    for (std::string line; std::getline(lines, line); ++n) {
      CHECK(nlohmann::json::parse(line).contains("val_metric"));
    }
    CHECK(n >= 1);
  }
}

TEST_CASE("eval reports and splits by domain") {
  const std::string json_path = (dir() / "report.json").string();
  const Run nli = cli({"eval", "--checkpoint", trained("nli"), "--data", nli_data(true), "--json", json_path});
  CHECK(nli.code == kExitOk);
  CHECK(contains(nli.out, "Avg"));
  const auto report = nlohmann::json::parse(read(json_path));
  CHECK(report.contains("macro_f1"));
  CHECK(report["domains"].size() == synthetic_domains().size());

  const Run partial = cli({"eval", "--checkpoint", trained("nli"), "--data", nli_data(false)});
  CHECK(partial.code == kExitOk);
  CHECK_FALSE(contains(partial.out, "Avg"));
  CHECK(cli({"eval", "--checkpoint", trained("nli"), "--data", nli_data(false), "--split-by-domain"})
            .code == kExitFailure);

  const Run ner = cli({"eval", "--checkpoint", trained("ner"), "--data", ner_data()});
  CHECK(ner.code == kExitOk);
  CHECK(contains(ner.out, "LAW"));
  CHECK(cli({"eval", "--checkpoint", trained("ner"), "--data", ner_data(), "--split-by-domain"}).code ==
        kExitFailure);
  CHECK(cli({"eval", "--checkpoint", trained("ner"), "--data", nli_data(true)}).code == kExitFailure);
}

TEST_CASE("predict output formats") {
  const std::string sentences = write("sentences.txt", "The company violated the Act\n\nNo claim here\n");
  const Run ner = cli({"predict", "--checkpoint", trained("ner"), "--input", sentences});
  CHECK(ner.code == kExitOk);
  for (std::istringstream in(ner.out); !in.eof();) {
    std::string line;
    std::getline(in, line);
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::size_t start = 0, end = 0;
    std::string type;
    CHECK(static_cast<bool>(fields >> start >> end >> type));
    CHECK(start < end);
  }

  const std::string pairs = write("pairs.tsv", "the firm sent texts\tthe firm violated TCPA\na\tb\n");
  const fs::path labels = dir() / "labels.txt";
  const Run nli = cli({"predict", "--checkpoint", trained("nli"), "--input", pairs, "--output", labels.string()});
  CHECK(nli.code == kExitOk);
  std::istringstream in(read(labels));
  std::size_t n = 0;
  for (std::string line; std::getline(in, line); ++n) {
    CHECK((line == "Entailed" || line == "Neutral" || line == "Contradict"));
  }
  CHECK(n == 2);

  const std::string no_tab = write("no_tab.tsv", "just a premise\n");
  const Run bad = cli({"predict", "--checkpoint", trained("nli"), "--input", no_tab});
  CHECK(bad.code == kExitFailure);
  CHECK(contains(bad.err, no_tab + ":1"));
  CHECK(cli({"predict", "--checkpoint", (dir() / "absent.ckpt").string(), "--input", pairs}).code ==
        kExitFailure);
}
