#pragma once

namespace echodyn {

// Compares a BLAS dgemm against Eigen's built-in product; cached after the first call.
bool blas_kernel_ok();

// For executables: if the BLAS self-test fails and OPENBLAS_CORETYPE is unset, re-exec the
// current binary with OPENBLAS_CORETYPE=Haswell. Returns normally otherwise.
void ensure_blas_kernel(char** argv);

}  // namespace echodyn
