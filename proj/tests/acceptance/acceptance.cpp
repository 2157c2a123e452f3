// Runs the release gate and prints one line per criterion. Exits nonzero if
// any criterion fails, so the harness can treat this binary as a single test.
#include <cstdio>

#include "tlab/selftest.hpp"

int main() {
  const auto results = tlab::run_selftest();
  int failed = 0;
  for (const auto& r : results) {
    std::printf("[%s] %d. %s: %s\n", r.pass ? "PASS" : "FAIL", r.index,
                r.name.c_str(), r.detail.c_str());
    std::fflush(stdout);
    if (!r.pass) ++failed;
  }
  if (failed > 0) std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
