#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gradcheck.hpp"
#include "legalnlp/ops.hpp"
#include "legalnlp/tensor.hpp"

namespace legalnlp::testing {

struct SuiteResult {
  bool pass = false;
  std::string detail;
};

// ---- gradients ------------------------------------------------------------

struct Probe {
  std::function<Tensor()> loss;
  std::vector<Tensor> leaves;
  bool kinks = false;
};

using ProbeFactory = std::function<Probe(Rng&)>;

struct NamedProbe {
  std::string name;
  ProbeFactory make;
};

/// One probe per differentiable op; each call draws fresh shapes and values.
const std::vector<NamedProbe>& op_probes();
/// Encoder, CNN branch, NER model and NLI model at toy dims.
const std::vector<NamedProbe>& model_probes();

struct GradSummary {
  std::string name;
  std::size_t cases = 0;
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
  std::size_t excluded = 0;
};

GradSummary run_probe(const NamedProbe& probe, std::size_t cases, std::uint64_t seed);

// ---- properties -----------------------------------------------------------

/// Softmax slice sums and encoder attention row sums on `n` random inputs each.
SuiteResult normalization_suite(std::size_t n, std::uint64_t seed);

/// Appends masked padding and compares encoder states, pooled vectors, CNN
/// features and both models' logits in eval mode.
SuiteResult padding_invariance_suite(std::size_t n, std::uint64_t seed, double tol = 1e-5);

/// Trains on 30 synthetic pairs until train macro-F1 ≥ target or max_epochs.
SuiteResult overfit_nli(std::size_t max_epochs, double target, std::uint64_t seed);
/// Trains on 20 synthetic sentences until train strict span F1 ≥ target.
SuiteResult overfit_ner(std::size_t max_epochs, double target, std::uint64_t seed);

/// Brute-force per-class oracle on `n` random prediction sets plus the
/// worked example and the four-domain average.
SuiteResult metric_oracle_suite(std::size_t n, std::uint64_t seed);

/// decode_bio validity on `n` random logit tensors and extract_spans round
/// trips on `n` random span sets.
SuiteResult bio_validity_suite(std::size_t n, std::uint64_t seed);

/// Two CLI training runs per task with the same seed and config.
SuiteResult determinism_suite(const std::filesystem::path& workdir);

SuiteResult config_fidelity_suite(const std::filesystem::path& ner_config,
                                  const std::filesystem::path& nli_config);

/// save → load → eval on a fixed batch for both tasks.
SuiteResult checkpoint_roundtrip_suite(const std::filesystem::path& workdir);

/// Brute-force macro F1: for each class counts predicted, gold and agreeing
/// examples separately and averages 2PR/(P+R).
double oracle_macro_f1(const std::vector<int>& preds, const std::vector<int>& golds,
                       std::size_t n_classes);

}  // namespace legalnlp::testing
