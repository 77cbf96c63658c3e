// Acceptance suite runner: executes every criterion at its pinned
// tolerance, prints one line per criterion, and re-runs the whole suite
// to confirm that the rendered report is byte-identical.

#include <cstdio>
#include <iostream>

#include "delaywave/acceptance.hpp"

int main() {
  using namespace delaywave;

  std::cout << "pass 1\n";
  const auto first = run_acceptance(&std::cout);
  std::cout << "pass 2 (reproducibility)\n";
  const auto second = run_acceptance(&std::cout);

  const std::string report1 = render_report(first);
  const std::string report2 = render_report(second);
  const bool reproducible = report1 == report2;

  std::cout << "\n" << report1;

  bool ok = true;
  for (const auto& r : first) {
    if (!r.pass) ok = false;
    if (r.budget_seconds > 0.0 && r.seconds > r.budget_seconds) {
      std::printf("criterion %d exceeded its runtime budget: %.1fs > %.0fs\n",
                  r.id, r.seconds, r.budget_seconds);
      ok = false;
    }
  }
  for (const auto& r : second)
    if (!r.pass) ok = false;

  std::printf("criterion 9 (reproducibility): %s\n",
              reproducible ? "PASS report bytes identical" : "FAIL reports differ");
  ok = ok && reproducible;

  std::printf("acceptance: %s\n", ok ? "PASS" : "FAIL");
  return ok ? 0 : 1;
}
