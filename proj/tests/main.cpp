#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "echodyn/platform.hpp"

int main(int argc, char** argv) {
  echodyn::ensure_blas_kernel(argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
