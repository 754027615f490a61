#include "legalnlp/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace legalnlp {

void ConfusionMatrix::add(std::size_t gold, std::size_t predicted) {
  if (gold >= n_ || predicted >= n_) throw std::out_of_range("confusion matrix index");
  ++counts_[gold * n_ + predicted];
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

ClassScores scores_from_counts(std::size_t true_pos, std::size_t false_pos,
                               std::size_t false_neg) {
  ClassScores s;
  const double tp = static_cast<double>(true_pos);
  if (true_pos + false_pos > 0) s.precision = tp / static_cast<double>(true_pos + false_pos);
  if (true_pos + false_neg > 0) s.recall = tp / static_cast<double>(true_pos + false_neg);
  // 2PR/(P+R) reduced to counts, so F1 is a single correctly rounded division.
  if (true_pos > 0) {
    s.f1 = 2.0 * tp / static_cast<double>(2 * true_pos + false_pos + false_neg);
  }
  s.support = true_pos + false_neg;
  return s;
}

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::to_string(i));
  return out;
}

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

using u128 = unsigned __int128;

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

// Mean of the per-class F1 values 2tp/(2tp+fp+fn). The sum is kept as an
// exact fraction while it fits, so e.g. (1 + 0 + 2/3)/3 yields the double
// nearest 5/9; otherwise it falls back to summing the rounded values.
double macro_from_counts(const std::vector<Counts>& counts) {
  if (counts.empty()) return 0.0;
  constexpr u128 kClassLimit = u128{1} << 40;
  constexpr u128 kRunningLimit = u128{1} << 63;
  u128 num = 0, den = 1;
  bool exact = true;
  for (const Counts& c : counts) {
    if (c.tp == 0) continue;
    const u128 cn = 2 * static_cast<u128>(c.tp);
    const u128 cd = cn + c.fp + c.fn;
    if (cd >= kClassLimit) {
      exact = false;
      break;
    }
    num = num * cd + cn * den;
    den = den * cd;
    const u128 g = gcd128(num, den);
    num /= g;
    den /= g;
    if (den >= kRunningLimit || num >= kRunningLimit * counts.size()) {
      exact = false;
      break;
    }
  }
  if (exact) {
    return static_cast<double>(num) / (static_cast<double>(den) * static_cast<double>(counts.size()));
  }
  double total = 0.0;
  for (const Counts& c : counts) total += scores_from_counts(c.tp, c.fp, c.fn).f1;
  return total / static_cast<double>(counts.size());
}

void check_spans(const std::vector<EntitySpan>& spans, const char* side, std::size_t sentence) {
  std::vector<EntitySpan> sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].start >= sorted[i].end) {
      throw std::invalid_argument(std::string(side) + " sentence " + std::to_string(sentence) +
                                  ": empty span");
    }
    if (i > 0 && sorted[i].start < sorted[i - 1].end) {
      throw std::invalid_argument(std::string(side) + " sentence " + std::to_string(sentence) +
                                  ": overlapping spans");
    }
  }
}

}  // namespace

EvalReport macro_f1(std::span<const int> preds, std::span<const int> golds,
                    std::size_t n_classes, std::vector<std::string> class_names) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("macro_f1: " + std::to_string(preds.size()) +
                                " predictions vs " + std::to_string(golds.size()) + " golds");
  }
  if (n_classes == 0) throw std::invalid_argument("macro_f1: n_classes must be >= 1");
  if (class_names.empty()) class_names = default_names(n_classes);
  if (class_names.size() != n_classes) throw std::invalid_argument("macro_f1: class name count");
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || golds[i] < 0 || static_cast<std::size_t>(preds[i]) >= n_classes ||
        static_cast<std::size_t>(golds[i]) >= n_classes) {
      throw std::out_of_range("macro_f1: class index outside [0, " + std::to_string(n_classes) +
                              ") at position " + std::to_string(i));
    }
    cm.add(static_cast<std::size_t>(golds[i]), static_cast<std::size_t>(preds[i]));
  }
  EvalReport report;
  report.class_names = std::move(class_names);
  std::size_t correct = 0;
  std::vector<Counts> counts(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Counts& k = counts[c];
    k.tp = cm.at(c, c);
    for (std::size_t o = 0; o < n_classes; ++o) {
      if (o == c) continue;
      k.fp += cm.at(o, c);
      k.fn += cm.at(c, o);
    }
    correct += k.tp;
    report.per_class.push_back(scores_from_counts(k.tp, k.fp, k.fn));
  }
  report.macro_f1 = macro_from_counts(counts);
  report.n_scored = preds.size();
  if (!preds.empty()) {
    const double acc = static_cast<double>(correct) / static_cast<double>(preds.size());
    report.micro_precision = report.micro_recall = report.micro_f1 = acc;
  }
  report.confusion = std::move(cm);
  return report;
}

EvalReport entity_f1_strict(const std::vector<std::vector<EntitySpan>>& pred,
                            const std::vector<std::vector<EntitySpan>>& gold) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("entity_f1_strict: " + std::to_string(pred.size()) +
                                " predicted sentences vs " + std::to_string(gold.size()) +
                                " gold sentences");
  }
  std::vector<std::size_t> tp(kEntityTypeCount, 0), fp(kEntityTypeCount, 0),
      fn(kEntityTypeCount, 0);
  for (std::size_t s = 0; s < pred.size(); ++s) {
    check_spans(pred[s], "predicted", s);
    check_spans(gold[s], "gold", s);
    const std::set<EntitySpan> gold_set(gold[s].begin(), gold[s].end());
    const std::set<EntitySpan> pred_set(pred[s].begin(), pred[s].end());
    for (const EntitySpan& p : pred_set) {
      const auto t = static_cast<std::size_t>(p.type);
      if (gold_set.contains(p)) {
        ++tp[t];
      } else {
        ++fp[t];
      }
    }
    for (const EntitySpan& g : gold_set)
      if (!pred_set.contains(g)) ++fn[static_cast<std::size_t>(g.type)];
  }
  EvalReport report;
  std::size_t all_tp = 0, all_fp = 0, all_fn = 0;
  std::vector<Counts> counts;
  for (EntityType type : kEntityTypes) {
    const auto t = static_cast<std::size_t>(type);
    report.class_names.push_back(entity_type_name(type));
    report.per_class.push_back(scores_from_counts(tp[t], fp[t], fn[t]));
    counts.push_back({tp[t], fp[t], fn[t]});
    all_tp += tp[t];
    all_fp += fp[t];
    all_fn += fn[t];
  }
  const ClassScores micro = scores_from_counts(all_tp, all_fp, all_fn);
  report.micro_precision = micro.precision;
  report.micro_recall = micro.recall;
  report.micro_f1 = micro.f1;
  report.macro_f1 = macro_from_counts(counts);
  report.n_scored = pred.size();
  return report;
}

double average_domain_f1(std::span<const double> domain_f1) {
  if (domain_f1.empty()) throw std::invalid_argument("average_domain_f1: no domains");
  double total = 0.0;
  for (double f : domain_f1) total += f;
  return total / static_cast<double>(domain_f1.size());
}

EvalReport domain_split_eval(std::span<const std::string> legal_acts,
                             std::span<const int> preds, std::span<const int> golds,
                             std::size_t n_classes, std::vector<std::string> class_names) {
  if (legal_acts.size() != preds.size()) {
    throw std::invalid_argument("domain_split_eval: " + std::to_string(legal_acts.size()) +
                                " legal_act values for " + std::to_string(preds.size()) +
                                " predictions");
  }
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < legal_acts.size(); ++i) {
    if (legal_acts[i].empty()) {
      throw std::invalid_argument("domain_split_eval: example " + std::to_string(i) +
                                  " has no legal_act");
    }
    groups[legal_acts[i]].push_back(i);
  }
  EvalReport report = macro_f1(preds, golds, n_classes, class_names);
  std::vector<double> per_domain;
  for (const auto& [act, indices] : groups) {
    std::vector<int> p, g;
    for (std::size_t i : indices) {
      p.push_back(preds[i]);
      g.push_back(golds[i]);
    }
    EvalReport sub = macro_f1(p, g, n_classes, report.class_names);
    per_domain.push_back(sub.macro_f1);
    report.domains.emplace_back(act, std::move(sub));
  }
  if (!per_domain.empty()) report.domain_average = average_domain_f1(per_domain);
  return report;
}

std::string format_report(const EvalReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << std::left << std::setw(16) << "class" << std::right << std::setw(10) << "precision"
      << std::setw(10) << "recall" << std::setw(10) << "f1" << std::setw(10) << "support" << '\n';
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    out << std::left << std::setw(16) << report.class_names[c] << std::right << std::setw(10)
        << 100.0 * s.precision << std::setw(10) << 100.0 * s.recall << std::setw(10)
        << 100.0 * s.f1 << std::setw(10) << s.support << '\n';
  }
  out << std::left << std::setw(16) << "macro-f1" << std::right << std::setw(30)
      << 100.0 * report.macro_f1 << '\n';
  out << std::left << std::setw(16) << "micro-f1" << std::right << std::setw(30)
      << 100.0 * report.micro_f1 << '\n';
  if (!report.domains.empty()) {
    out << '\n';
    for (const auto& [act, sub] : report.domains) out << act << '\t';
    out << "Avg\n";
    for (const auto& [act, sub] : report.domains) out << 100.0 * sub.macro_f1 << '\t';
    out << 100.0 * report.domain_average.value_or(0.0) << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json j;
  j["macro_f1"] = report.macro_f1;
  j["micro_precision"] = report.micro_precision;
  j["micro_recall"] = report.micro_recall;
  j["micro_f1"] = report.micro_f1;
  j["n_scored"] = report.n_scored;
  nlohmann::json classes = nlohmann::json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& s = report.per_class[c];
    classes.push_back({{"name", report.class_names[c]},
                       {"precision", s.precision},
                       {"recall", s.recall},
                       {"f1", s.f1},
                       {"support", s.support}});
  }
  j["per_class"] = classes;
  if (report.confusion) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t g = 0; g < report.confusion->n_classes(); ++g) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t p = 0; p < report.confusion->n_classes(); ++p)
        row.push_back(report.confusion->at(g, p));
      rows.push_back(row);
    }
    j["confusion"] = rows;
  }
  if (!report.domains.empty()) {
    nlohmann::json domains = nlohmann::json::object();
    for (const auto& [act, sub] : report.domains) domains[act] = report_json(sub);
    j["domains"] = domains;
    j["domain_average"] = report.domain_average.value_or(0.0);
  }
  return j;
}

}  // namespace

std::string report_to_json(const EvalReport& report) { return report_json(report).dump(2); }

}  // namespace legalnlp
