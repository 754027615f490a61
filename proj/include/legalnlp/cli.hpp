#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace legalnlp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the legalnlp tool: train-ner | train-nli | eval | predict.
/// Returns 0 only when every requested output was written.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);
/// Same, with args excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace legalnlp
