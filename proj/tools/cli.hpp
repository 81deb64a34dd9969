#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sense::cli {

enum ExitCode : int {
  kOk = 0,
  kSemanticFailure = 1,
  kParseError = 2,
  kDegenerate = 3,
  kBudget = 4,
  kIncomparable = 5,
  kScope = 6,
  kSamplingExhausted = 7,
};

/// Runs `sense <args...>`; args excludes the program name. JSON goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sense::cli
