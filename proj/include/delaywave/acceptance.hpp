#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace delaywave {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;          // deterministic metrics, no timings
  double seconds = 0.0;        // wall time, reported separately
  double budget_seconds = 0.0; // 0 = no budget
};

/// Runs acceptance criteria 1-8. Every tolerance is pinned in code; the
/// detail strings contain only deterministic values so that consecutive
/// invocations render byte-identical reports.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

std::string render_report(const std::vector<CriterionResult>& results);

}  // namespace delaywave
