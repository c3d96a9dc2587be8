#include "echodyn/platform.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdlib>

#include "echodyn/types.hpp"

namespace echodyn {

bool blas_kernel_ok() {
  static const bool ok = [] {
    const int n = 320;
    MatD A(n, n), B(n, n);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        A(i, j) = std::sin(0.37 * i + 1.3 * j);
        B(i, j) = std::cos(0.11 * i - 0.7 * j);
      }
    const MatD C = A * B;
    const MatD R = A.lazyProduct(B);
    return (C - R).norm() <= 1e-10 * R.norm();
  }();
  return ok;
}

void ensure_blas_kernel(char** argv) {
  if (std::getenv("OPENBLAS_CORETYPE") || blas_kernel_ok()) return;
  setenv("OPENBLAS_CORETYPE", "Haswell", 1);
  execv("/proc/self/exe", argv);
}

}  // namespace echodyn
