// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate: runs the full verification suite at the fixed default seed
// and prints one PASS/FAIL line per numbered criterion, then the full report.
// The exit code is the number of failed criteria.
#include <cstdio>
#include <map>
#include <string>

#include "chase_escape/cli.hpp"
#include "chase_escape/verify.hpp"

int main() {
  const chase::VerifyReport report = chase::run_verify_suite(
      chase::VerifyLevel::Full, chase::kDefaultVerifySeed, 0);

  struct Tally {
    int total = 0;
    int passed = 0;
  };
  std::map<int, Tally> tallies;
  for (const chase::CheckResult& check : report.checks) {
    if (check.criterion == 0) continue;  // unnumbered supporting checks
    Tally& tally = tallies[check.criterion];
    ++tally.total;
    if (check.passed) ++tally.passed;
  }

  const std::map<int, std::string> labels{
      {1, "first-jump recovery mass"},
      {2, "samplers match the exact absorption law"},
      {3, "samplers match each other at scale"},
      {4, "limiting extinction frequencies"},
      {5, "critical survivor count is dyadic geometric"},
      {6, "subcritical survivor scaling limit"},
      {7, "critical recovered and infected fractions"},
      {8, "supercritical recovered scaling limit"},
      {9, "expectation asymptotics"},
      {10, "outbreak growth exponent"},
      {11, "endpoint race decay exponent"},
      {12, "limit-law self checks"},
      {13, "report determinism across worker counts"},
  };

  int failed = 0;
  for (const auto& [criterion, label] : labels) {
    const auto it = tallies.find(criterion);
    const bool present = it != tallies.end();
    const bool ok = present && it->second.passed == it->second.total;
    if (!ok) ++failed;
    std::printf("[%s] criterion %2d: %s (%d/%d checks)\n",
                ok ? "PASS" : "FAIL", criterion, label.c_str(),
                present ? it->second.passed : 0,
                present ? it->second.total : 0);
  }
  std::printf("\n%s", chase::render_verify_report(report).c_str());
  return failed;
}
