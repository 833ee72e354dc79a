// Runs acceptance criteria 1-11 and prints one PASS/FAIL line per criterion.
// Usage: acceptance [workers]

#include <cstdio>
#include <cstdlib>

#include "skorokhod/runner.hpp"

using namespace skorokhod;

int main(int argc, char** argv) {
  AcceptanceSettings s;
  if (argc > 1) s.workers = static_cast<unsigned>(std::strtoul(argv[1], nullptr, 10));
  if (s.workers == 0) s.workers = 1;
  int failed = 0;
  run_acceptance(s, [&](const CriterionResult& r) {
    std::printf("%s criterion %d: %s: %s (%.1f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    if (!r.pass) ++failed;
  });
  std::printf("%d of 11 criteria failed\n", failed);
  return failed ? 1 : 0;
}
