#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "legalnlp/ner.hpp"

namespace legalnlp {

// rows = gold, cols = predicted.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes)
      : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  void add(std::size_t gold, std::size_t predicted);
  std::size_t at(std::size_t gold, std::size_t predicted) const { return counts_[gold * n_ + predicted]; }
  std::size_t n_classes() const { return n_; }
  std::size_t total() const;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // gold count
};

/// Precision/recall/F1 from raw counts; every zero denominator yields 0.
ClassScores scores_from_counts(std::size_t true_pos, std::size_t false_pos,
                               std::size_t false_neg);

struct EvalReport {
  std::vector<std::string> class_names;
  std::vector<ClassScores> per_class;
  double macro_f1 = 0.0;
  // Micro scores: accuracy-equivalent for classification, span-level for NER.
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  std::size_t n_scored = 0;
  std::optional<ConfusionMatrix> confusion;
  // Per-legal_act sub-reports (sorted by name) and their unweighted mean macro-F1.
  std::vector<std::pair<std::string, EvalReport>> domains;
  std::optional<double> domain_average;
};

/// Per-class and macro F1 over class indices in [0, n_classes).
EvalReport macro_f1(std::span<const int> preds, std::span<const int> golds,
                    std::size_t n_classes, std::vector<std::string> class_names = {});

/// Strict span scoring: a prediction counts only if start, end and type all
/// match a gold span of the same sentence. Micro P/R/F1 over all spans plus
/// per-type scores; macro_f1 is the mean over the four types.
EvalReport entity_f1_strict(const std::vector<std::vector<EntitySpan>>& pred,
                            const std::vector<std::vector<EntitySpan>>& gold);

/// Unweighted mean.
double average_domain_f1(std::span<const double> domain_f1);

/// Pooled macro-F1 report with one sub-report per legal_act and the
/// unweighted average of the per-domain macro-F1 values.
EvalReport domain_split_eval(std::span<const std::string> legal_acts,
                             std::span<const int> preds, std::span<const int> golds,
                             std::size_t n_classes, std::vector<std::string> class_names = {});

/// Human-readable table (percent values).
std::string format_report(const EvalReport& report);
/// Structured JSON.
std::string report_to_json(const EvalReport& report);

}  // namespace legalnlp
