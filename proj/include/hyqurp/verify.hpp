#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace hyqurp {

struct VerifyOptions {
  int n_min = 2;
  int n_max = 4;
  std::uint64_t seed = 20240601;
  bool inject_sign_fault = false;  // test hook: breaks pair equivariance only
};

struct CheckResult {
  std::string name;
  int n_points = 0;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::vector<std::string> failures() const;
};

/// Runs every invariant check for N in [n_min, n_max], writing one line per
/// check to `log`.
VerifyReport run_verify(const VerifyOptions& opts, std::ostream& log);

}  // namespace hyqurp
