// Prints one PASS/FAIL line per acceptance criterion; exits nonzero when any
// criterion fails numerically or exceeds its runtime limit.
// Usage: acceptance [id ...]

#include "sdd/validation.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  int failed = 0;
  for (const auto& r : sdd::run_acceptance(ids)) {
    std::cout << sdd::format_result(r) << std::endl;
    if (!r.ok()) ++failed;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << '\n';
  return failed ? 1 : 0;
}
