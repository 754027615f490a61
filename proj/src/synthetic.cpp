#include "legalnlp/synthetic.hpp"

#include <sstream>

#include "legalnlp/ner.hpp"

namespace legalnlp {

namespace {

struct Domain {
  std::string name;
  std::vector<std::string> violations;
  std::vector<std::string> victims;
  std::vector<std::string> laws;
};

const std::vector<Domain>& domains() {
  static const std::vector<Domain> kDomains = {
      {"Consumer Protection",
       {"charged hidden fees", "advertised fake discounts", "sold defective heaters"},
       {"customers", "online shoppers", "elderly buyers"},
       {"the Consumer Fraud Act", "state consumer protection statutes"}},
      {"Privacy",
       {"collected biometric data", "shared browsing histories", "tracked location data"},
       {"app users", "website visitors", "patients"},
       {"the Biometric Information Privacy Act", "the California Consumer Privacy Act"}},
      {"TCPA",
       {"sent unsolicited text messages", "placed prerecorded robocalls", "dialed cell phones"},
       {"consumers", "mobile subscribers", "former clients"},
       {"the Telephone Consumer Protection Act", "the TCPA"}},
      {"Wage",
       {"failed to pay overtime", "withheld earned tips", "skipped meal breaks"},
       {"employees", "warehouse workers", "delivery drivers"},
       {"the Fair Labor Standards Act", "state wage laws"}},
  };
  return kDomains;
}

const std::vector<std::string> kCompanies = {"Acme Corp", "Globex", "Initech LLC",
                                             "Umbrella Inc", "Hooli", "Vandelay Industries"};

template <typename T>
const T& pick(const std::vector<T>& options, Rng& rng) {
  return options[static_cast<std::size_t>(rng() % options.size())];
}

std::vector<std::string> words(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

class SentenceBuilder {
 public:
  void text(const std::string& t) {
    for (auto& w : words(t)) {
      tokens_.push_back(w);
      tags_.push_back("O");
    }
  }
  void entity(const std::string& t, EntityType type) {
    const std::string name = entity_type_name(type);
    bool first = true;
    for (auto& w : words(t)) {
      tokens_.push_back(w);
      tags_.push_back((first ? "B-" : "I-") + name);
      first = false;
    }
  }
  NerRecord build() { return {std::move(tokens_), std::move(tags_)}; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::string> tags_;
};

}  // namespace

const std::vector<std::string>& synthetic_domains() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> out;
    for (const auto& d : domains()) out.push_back(d.name);
    return out;
  }();
  return kNames;
}

std::vector<NerRecord> synthetic_ner(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<NerRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Domain& d = domains()[i % domains().size()];
    const std::string& by = pick(kCompanies, rng);
    const std::string& what = pick(d.violations, rng);
    const std::string& on = pick(d.victims, rng);
    const std::string& law = pick(d.laws, rng);
    SentenceBuilder s;
    switch (rng() % 3) {
      case 0:
        s.entity(by, EntityType::kViolatedBy);
        s.entity(what, EntityType::kViolation);
        s.text("to");
        s.entity(on, EntityType::kViolatedOn);
        s.text("in violation of");
        s.entity(law, EntityType::kLaw);
        s.text(".");
        break;
      case 1:
        s.text("according to the complaint ,");
        s.entity(by, EntityType::kViolatedBy);
        s.entity(what, EntityType::kViolation);
        s.text("affecting");
        s.entity(on, EntityType::kViolatedOn);
        s.text(", which breaches");
        s.entity(law, EntityType::kLaw);
        s.text(".");
        break;
      default:
        s.entity(on, EntityType::kViolatedOn);
        s.text("allege that");
        s.entity(by, EntityType::kViolatedBy);
        s.entity(what, EntityType::kViolation);
        s.text("contrary to");
        s.entity(law, EntityType::kLaw);
        s.text(".");
        break;
    }
    out.push_back(s.build());
  }
  return out;
}

std::vector<NliRecord> synthetic_nli(std::size_t per_class, std::uint64_t seed) {
  Rng rng(seed);
  static const std::vector<std::string> kDays = {"monday", "tuesday", "friday", "sunday"};
  std::vector<NliRecord> out;
  for (std::size_t i = 0; i < per_class; ++i) {
    for (std::size_t c = 0; c < kNliClasses; ++c) {
      const Domain& d = domains()[(i * kNliClasses + c) % domains().size()];
      const std::string& by = pick(kCompanies, rng);
      const std::string& what = pick(d.violations, rng);
      const std::string& on = pick(d.victims, rng);
      NliRecord r;
      r.premise = by + " " + what + " to " + on + " in violation of " + pick(d.laws, rng) + " .";
      switch (static_cast<NliLabel>(c)) {
        case NliLabel::kEntailed:
          r.hypothesis = "yes , " + by + " really " + what + " to me and other " + on;
          break;
        case NliLabel::kNeutral:
          r.hypothesis = "the " + by + " office opened late on " + pick(kDays, rng);
          break;
        case NliLabel::kContradict:
          r.hypothesis = by + " never " + what + " , that claim is false";
          break;
      }
      r.label = static_cast<NliLabel>(c);
      r.legal_act = d.name;
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace legalnlp
