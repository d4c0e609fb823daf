#ifndef STARCP_VALIDATION_HPP
#define STARCP_VALIDATION_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace starcp {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct ValidationOptions {
  bool full = true;  // false: small-N oracle checks only
  std::uint64_t seed = 20240817;
};

// Runs the acceptance suite (11 numbered criteria when full, a small-N subset
// otherwise), printing one "PASS/FAIL [k] name" line per criterion.
std::vector<CriterionResult> run_validation(const ValidationOptions& opts,
                                            std::ostream& os);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace starcp

#endif  // STARCP_VALIDATION_HPP
