#pragma once

#include <cstdint>
#include <vector>

#include "legalnlp/dataset.hpp"

namespace legalnlp {

/// Template sentences, each planting one VIOLATED_BY, VIOLATION,
/// VIOLATED_ON and LAW span.
std::vector<NerRecord> synthetic_ner(std::size_t n, std::uint64_t seed);

/// `per_class` pairs for each label. The premise is a complaint summary; the
/// hypothesis carries a label cue. Records cycle through the four legal_act
/// domains.
std::vector<NliRecord> synthetic_nli(std::size_t per_class, std::uint64_t seed);

/// The four legal_act values used by synthetic_nli.
const std::vector<std::string>& synthetic_domains();

}  // namespace legalnlp
