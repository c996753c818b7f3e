#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qunac::app {

struct SelftestOptions {
  std::uint64_t seed = 20131;
  /// Multiplies every error tolerance and divides every margin threshold.
  /// Values below 1 tighten the suite.
  double tolerance_scale = 1.0;
};

struct PropertyOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the invariant suite, printing one "PASS name: detail" or
/// "FAIL name: detail" line per property.
std::vector<PropertyOutcome> run_selftest(const SelftestOptions& options, std::ostream& out);

/// 0 when every property passed, 1 otherwise.
int selftest_exit_code(const std::vector<PropertyOutcome>& outcomes);

}  // namespace qunac::app
