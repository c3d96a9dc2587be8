#pragma once

#include <vector>

#include "echodyn/two_resolvent.hpp"

namespace echodyn {

struct RenormalizationOptions {
  double bracket_constant = 4.0;  // bracket [E2 - C*Delta, E2 + C*Delta]
  double tol = 1e-10;
  int max_iter = 100;
};

struct RenormalizationResult {
  double f_value = 0.0;
  cplx s0{0.0, 0.0};
  int newton_iterations = 0;
  Interval bracket;
  double residual = 0.0;
};

// Spectral solution at E - i eta1 (eta1 > 0) or the lower boundary value (eta1 = 0).
MdeSolution lower_solution(const Deformation& D, double e, double eta);
MdeSolution upper_solution(const Deformation& D, double e, double eta);

RenormalizationResult energy_renormalization(const Deformation& D1, const Deformation& D2, double E2,
                                             double eta1, double eta2,
                                             const RenormalizationOptions& opt = {});

cplx renormalized_shift(const Deformation& D1, const Deformation& D2, double E2, double eta1,
                        double eta2, const RenormalizationOptions& opt = {});

double inverse_renormalization(const Deformation& D1, const Deformation& D2, double E0, double eta1,
                               double eta2, const RenormalizationOptions& opt = {});

struct DecayParameters {
  double gamma = 0.0;
  double Gamma = 0.0;
  double E0 = 0.0;
  double eta0 = 0.0;
  double extrapolation_residual = 0.0;
  std::vector<double> ladder;        // eta values used for the Gamma fit
  std::vector<double> ladder_im_s0;  // Im s0 at each ladder point
  std::vector<double> ladder_E2;     // renormalized energies
};

struct GammaOptions {
  double ladder_base = 1.0 / 8.0;  // ladder {c, c/2, c/4} * Delta
  double max_disagreement = 0.10;
  RenormalizationOptions renorm;
};

DecayParameters gamma_rate(const Deformation& D1, const Deformation& D2, double E0,
                           const GammaOptions& opt = {});

DecayParameters parabolic_coefficient(const Deformation& D1, const Deformation& D2, double E0,
                                      double eta0);

}  // namespace echodyn
