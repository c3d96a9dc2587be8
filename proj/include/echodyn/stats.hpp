#pragma once

#include <vector>

#include "echodyn/types.hpp"

namespace echodyn {

// Fixed-order pairwise summation.
double pairwise_sum(const double* x, std::size_t n);
cplx pairwise_sum(const cplx* x, std::size_t n);
double pairwise_sum(const std::vector<double>& x);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};
MeanStderr mean_stderr(const std::vector<double>& x);

struct PolyFit {
  VecD coef;     // c0 + c1 x + c2 x^2 + ...
  VecD stderr_;  // from the weighted normal equations, scaled by the reduced chi-square when dof > 0
  double chi2 = 0.0;
  int dof = 0;
};

// Weighted least squares with weights 1/sigma^2 (sigma <= 0 entries get unit weight).
PolyFit weighted_polyfit(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& sigma, const std::vector<int>& powers);

}  // namespace echodyn
