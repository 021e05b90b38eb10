#pragma once

// Fast invariant suite behind `krtv selftest`. Each check prints one line and
// the suite passes only if every check does.

#include <iosfwd>
#include <string>
#include <vector>

namespace krtv {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double wall_ms = 0.0;
};

/// Runs all checks; `log`, when given, receives one line per finished check.
std::vector<CheckResult> run_selftest(std::ostream* log = nullptr);

}  // namespace krtv
