#pragma once

#include <complex>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

// Root of m^2 + z m + 1 = 0 in the half-plane of z.
cplx semicircle_m(cplx z);

// Scalar self-consistent equation for diagonal D: m_k = 1/(d_k - z - <m>), solved by bisection on
// the trace along a damped iteration written independently of the library.
std::vector<cplx> diagonal_mde(const std::vector<double>& d, cplx z);

// Simpson rule on the Cauchy convolution after x = tan(u).
double cauchy_convolution(double E1, double eta1, double E2, double eta2, int panels = 20000);

// (1/2) int_{-1}^{1} dx/(x - z) by the elementary antiderivative.
cplx uniform_stieltjes(cplx z);

double semicircle_density(double e);

}  // namespace oracle
