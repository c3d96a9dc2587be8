#pragma once

#include "echodyn/mde.hpp"

namespace echodyn {

inline constexpr double kDegeneracyFloor = 1e-14;
// Largest Delta for which the shift is treated as small.
inline constexpr double kShiftValidity = 0.25;

// Atom-space bilinear forms <f(D1) X g(D2)> reduce to sums over the coupling matrix.
struct PairForms {
  cplx m1m2;        // <M1 M2>
  cplx m1dm2;       // <M1 (D1 - D2) M2>
  double delta2;    // <(D1 - D2)^2>
};
PairForms pair_forms(const MdeSolution& M1, const MdeSolution& M2);

struct M12Result {
  cplx trace;        // <M12>
  cplx stability;    // 1 - <M1 M2>
  MdeSolution M1, M2;
  MatC matrix() const;  // M1 M2 / (1 - <M1 M2>), dense
};
M12Result m12(const MdeSolution& M1, const MdeSolution& M2);

struct StabilityReading {
  cplx eigenvalue;    // 1 - <M1 M2>
  double bound_rhs;   // max(1/S, 1), S the denominator sum of the stability bound
  double delta2;
  double ratio;       // |eigenvalue|^-1 / bound_rhs
};
StabilityReading stability_eigenvalue(const MdeSolution& M1, const MdeSolution& M2);

struct ShiftValue {
  cplx value;
  cplx denominator;  // <M1 M2>
};
ShiftValue shift(const MdeSolution& M1, const MdeSolution& M2);
ShiftValue shift(const MdeSolution& M1, const MdeSolution& M2, const Deformation& D1,
                 const Deformation& D2);

// d/dz1 of the shift at fixed z2.
cplx shift_dz1(const MdeSolution& M1, const MdeSolution& M2);

double m_identity_residual(const MdeSolution& M1, const MdeSolution& M2, cplx z1, cplx z2,
                           const Deformation& D1, const Deformation& D2);

struct StabilityIntegral {
  double value = 0.0;
  int evaluations = 0;
  int singular_points = 0;
};

// Integral of 1/|1 - <M(E+i eta)^2>| over [lo, hi]; eta = 0 uses boundary values.
StabilityIntegral one_body_stability_integral(const Deformation& D, double eta, double lo, double hi,
                                              double step = 1e-2);

}  // namespace echodyn
