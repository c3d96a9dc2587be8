#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace echodyn {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::vector<int> only;  // empty runs all 14
  int workers = 1;
  std::ostream* log = nullptr;  // one line per finished criterion
};

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {});

std::string format_criterion(const CriterionResult& r);

}  // namespace echodyn
