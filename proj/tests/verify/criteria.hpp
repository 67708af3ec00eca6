#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uzawa::verify {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0;
};

struct CriterionInfo {
  int id;
  const char* name;
};
const std::vector<CriterionInfo>& criteria();

/// Runs one criterion; exceptions are reported as failures.
CriterionResult run_criterion(int id);

/// "PASS  7 linear convergence ... (12.3 s)"
std::string format(const CriterionResult& r);

}  // namespace uzawa::verify
