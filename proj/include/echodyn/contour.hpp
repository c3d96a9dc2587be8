#pragma once

#include <string>
#include <vector>

#include "echodyn/shift_calculus.hpp"

namespace echodyn {

// eta2 = min{c_time/t, c_eta0*eta0, c_delta*Delta}. The tag is "first" or "second" when c_time/t
// attains the minimum (split at t*Delta = first_regime_t_delta) and "third" otherwise.
struct RegimeConfig {
  double c_time = 4.0;
  double c_eta0 = 0.25;
  double c_delta = 0.125;
  double first_regime_t_delta = 4.0;
  double radius = 0.0;  // 0 selects max ||D_j|| + 3
  double tolerance = 1e-6;
  int nodes_per_wavelength = 10;
};

struct ContourPath {
  std::vector<cplx> nodes;
  std::vector<cplx> weights;  // dz weights, orientation included
};

struct ContourSpec {
  double R = 0.0;
  double t = 1.0;
  double eta0 = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  std::string regime;
  double fine_width = 0.0;    // flat panel width over the spectral region
  double coarse_width = 0.0;  // flat panel width elsewhere
  double arc_angle = 0.0;     // panel angle on the arcs, in units of 1/radius
  double fine_half_width = 0.0;
  double tolerance = 1e-6;
  ContourPath gamma1;
  ContourPath gamma2;
};

ContourSpec build_contours(const Deformation& D1, const Deformation& D2, double t, double eta0,
                           const RegimeConfig& cfg = {});

// Nodes of both contours with every panel split into 2^level pieces.
void contour_paths(const ContourSpec& spec, int level, ContourPath& g1, ContourPath& g2);

struct DeterministicAmplitude {
  cplx value{0.0, 0.0};
  cplx first_line{0.0, 0.0};
  cplx second_line{0.0, 0.0};
  double quadrature_error_estimate = 0.0;
  std::string regime_tag;
  long long nodes = 0;
};

DeterministicAmplitude deterministic_echo_amplitude(const Deformation& D1, const Deformation& D2,
                                                    double E0, double eta0, double t,
                                                    const ContourSpec& spec);

struct PhasePrediction {
  cplx value{0.0, 0.0};
  cplx s0{0.0, 0.0};
  double E2 = 0.0;
  double im_m1 = 0.0;  // <Im M1(E0 + i eta0)>
  double eta1 = 0.0, eta2 = 0.0;
};

PhasePrediction phase_prediction(const Deformation& D1, const Deformation& D2, double E0, double eta0,
                                 double t, const RegimeConfig& cfg = {});

double cauchy_convolution(double E1, double eta1, double E2, double eta2);

// (1 + log t)/t + Delta |log Delta| + eta0 |log Delta| / Delta
double echo_error_envelope(double t, double delta, double eta0);

}  // namespace echodyn
