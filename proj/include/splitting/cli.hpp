#pragma once

// Command-line front end: analyze, exact, simulate, converge, study.
//
// Exit codes: 0 ok, 1 a study verdict failed, 2 spec or usage error,
// 3 span undecidable at the factorization bound, 4 resource bound,
// 5 simulation budget.

namespace splitting::cli {

enum ExitCode : int {
  kOk = 0,
  kVerdictFailed = 1,
  kSpecError = 2,
  kUndecidable = 3,
  kResource = 4,
  kBudget = 5,
};

inline constexpr const char* kToolVersion = "0.1.0";

int run(int argc, char** argv);

}  // namespace splitting::cli
