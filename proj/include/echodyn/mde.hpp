#pragma once

#include <string>
#include <utility>
#include <vector>

#include "echodyn/deformation.hpp"

namespace echodyn {

struct MdeOptions {
  double tol = 1e-12;
  int max_iter = 10000;
  double alpha = 0.5;
  // Newton polish on the trace equation once the damped iteration contracts slower than this.
  double stall_ratio = 0.95;
};

// Solution of -M^{-1} = z - D + <M>. M commutes with D, so it is stored by its value on
// each atom (distinct eigenvalue) of D.
struct MdeSolution {
  SpectralPoint point;
  Deformation D;
  VecC values;
  cplx m_trace{0.0, 0.0};
  double rho = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool newton_polish = false;
  bool boundary = false;           // obtained by eta -> 0 extrapolation
  double extrapolation_residual = 0.0;

  MatC m_matrix() const { return D.function_of(values); }
  cplx z() const { return point.z(); }
  double im_trace() const { return m_trace.imag(); }
};

MdeSolution solve_mde(const Deformation& D, SpectralPoint z, const MdeOptions& opt = {},
                      const VecC* warm_start = nullptr);

// ||M + (z - D + <M>)^{-1}||_F / sqrt(N) for given atom values at z.
double mde_residual(const Deformation& D, cplx z, const VecC& values);

double scdos(const Deformation& D, double e, double eta);

struct BoundaryOptions {
  double eta_start = 1e-2;
  double eta_floor = 1e-8;
  double max_extrapolation_residual = 1e-6;
  MdeOptions mde;
};

MdeSolution boundary_m(const Deformation& D, double e, const BoundaryOptions& opt = {});

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BulkSet {
  double kappa = 0.0;
  std::vector<Interval> intervals;
  bool contains(double e) const;
};

// rho evaluated with boundary_m on a uniform grid over [-||D||-2, ||D||+2].
BulkSet kappa_bulk(const Deformation& D, double kappa, double grid = 1e-3);

struct AdmissibilityReport {
  bool admissible = false;
  std::vector<std::pair<int, int>> segments;  // [first, last] sorted-eigenvalue indices
  int violating_j = -1;
  int violating_k = -1;
  std::string message;
};

// Greedy Hoelder-1/2 partition test over sorted eigenvalues. With declared_breaks (start indices
// of segments after the first), the given partition is tested instead of the greedy one.
AdmissibilityReport check_admissible(const Deformation& D, double L,
                                     const std::vector<int>* declared_breaks = nullptr);

// Closed-form semicircle Stieltjes transform, branch Im m * Im z > 0.
cplx m_semicircle(cplx z);

}  // namespace echodyn
