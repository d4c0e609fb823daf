// Acceptance gate: runs every numbered validation criterion and prints one
// PASS/FAIL line per criterion. Exit status 0 iff all criteria pass.
#include <iostream>

#include "starcp/validation.hpp"

int main() {
  starcp::ValidationOptions opts;
  opts.full = true;
  auto results = starcp::run_validation(opts, std::cout);
  bool ok = starcp::all_passed(results);
  std::cout << (ok ? "ACCEPTANCE: all criteria passed"
                   : "ACCEPTANCE: FAILURES PRESENT")
            << std::endl;
  return ok ? 0 : 1;
}
