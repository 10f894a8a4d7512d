// One line per acceptance criterion. Each criterion runs its property suite at
// seed 0 and must pass every check inside the wall-clock limit pinned below;
// the last one reruns all suites and compares the serialized summaries.
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "monoext/suites.hpp"

using namespace monoext;

namespace {

struct Criterion {
  int id;
  const char* title;
  const char* suite;
  double limit_seconds;
};

const std::vector<Criterion> kCriteria{
    {1, "nesting representation is exact and unique", "nesting", 30.0},
    {2, "polytope vertices are the up-set indicators", "choquet", 10.0},
    {3, "LP optima have at most m+1 nested levels", "vertices", 180.0},
    {4, "majorization verdicts and Dykstra rationalizers", "gutmann", 120.0},
    {5, "separable optima have rectangle structure and are unique", "rectangle", 300.0},
    {6, "extreme marginal structures and perturbation witnesses", "extremes", 60.0},
    {7, "public good three-region allocation", "pubgood", 120.0},
    {8, "bilateral trade regions and markup pooling", "trade", 180.0},
    {9, "reduced-form feasibility, auctions and investment", "rfauction", 300.0},
    {10, "anti-equivalence uniqueness and twins", "anti", 120.0},
    {11, "private private information optima and thresholds", "ppi", 60.0},
};

constexpr std::uint64_t kSeed = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
  int failed = 0;
  std::vector<std::string> first_runs;
  for (const Criterion& c : kCriteria) {
    const auto t0 = std::chrono::steady_clock::now();
    const SuiteReport r = run_suite(c.suite, {kSeed, false});
    const double elapsed = seconds_since(t0);
    first_runs.push_back(r.to_json().dump());
    const bool ok = r.passed() && elapsed < c.limit_seconds;
    failed += !ok;
    std::printf("%s %2d %-58s %zu checks, %zu failed, %.2f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.title,
                r.checks(), r.failed(), elapsed, c.limit_seconds);
    if (elapsed >= c.limit_seconds) std::printf("       over the time limit\n");
    for (const auto& f : r.failures()) std::printf("       %s\n", f.c_str());
    std::fflush(stdout);
  }

  std::vector<std::string> differing;
  for (std::size_t i = 0; i < kCriteria.size(); ++i)
    if (run_suite(kCriteria[i].suite, {kSeed, false}).to_json().dump() != first_runs[i])
      differing.push_back(kCriteria[i].suite);
  const bool deterministic = differing.empty();
  failed += !deterministic;
  std::printf("%s 12 %-58s %zu suites rerun, %zu differ\n", deterministic ? "PASS" : "FAIL",
              "same seed gives byte-identical summaries", kCriteria.size(), differing.size());
  for (const auto& s : differing) std::printf("       %s\n", s.c_str());

  std::printf("%d of 12 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
