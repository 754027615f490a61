// Writes rule-generated NER or NLI data as JSON lines.
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "legalnlp/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic legal NER / NLI data", "legalnlp_synth"};
  std::string task;
  std::size_t count = 20;
  std::uint64_t seed = 0;
  std::string out_path;
  app.add_option("--task", task, "ner or nli")->required()->check(CLI::IsMember({"ner", "nli"}));
  app.add_option("--count", count, "sentences (ner) or pairs per class (nli)");
  app.add_option("--seed", seed);
  app.add_option("--out", out_path, "output file")->required();
  CLI11_PARSE(app, argc, argv);

  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "error: cannot open " << out_path << '\n';
    return 1;
  }
  if (task == "ner") {
    legalnlp::write_ner_dataset(out, legalnlp::synthetic_ner(count, seed));
  } else {
    legalnlp::write_nli_jsonl(out, legalnlp::synthetic_nli(count, seed));
  }
  out.flush();
  if (!out) {
    std::cerr << "error: write failed for " << out_path << '\n';
    return 1;
  }
  return 0;
}
