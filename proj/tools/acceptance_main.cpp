#include <cstdlib>
#include <iostream>
#include <string>

#include "echodyn/acceptance.hpp"
#include "echodyn/platform.hpp"

int main(int argc, char** argv) {
  echodyn::ensure_blas_kernel(argv);
  echodyn::AcceptanceOptions opt;
  opt.log = &std::cout;
  for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
  if (const char* w = std::getenv("ECHODYN_WORKERS")) opt.workers = std::max(1, std::atoi(w));
  const auto results = echodyn::run_acceptance(opt);
  int failed = 0;
  for (const auto& r : results) failed += !r.passed;
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
