#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "echodyn/mde.hpp"

namespace echodyn {

struct LimitingDensity {
  std::string name;
  std::function<double(double)> evaluate;
  std::function<cplx(cplx)> closed_form_m0;  // empty when only quadrature is available
  std::function<double(double)> cdf;         // empty for quadrature-based CDF
  std::vector<Interval> support;
  std::vector<double> xs, ys;                // tabulation (piecewise-linear), if any
  double epsilon0 = std::numeric_limits<double>::quiet_NaN();
  double eta0_floor = 0.0;

  double operator()(double x) const { return evaluate(x); }
  double total_mass() const;

  static LimitingDensity semicircle();
  static LimitingDensity uniform(double a, double b);
  // Piecewise-linear table; xs strictly increasing, ys >= 0, zero outside [xs.front(), xs.back()].
  static LimitingDensity tabulated(std::vector<double> xs, std::vector<double> ys, bool normalize = false);
};

// Two-column text "x rho" with '#' comments.
LimitingDensity load_density_table(const std::string& path, bool normalize = false);
void save_density_table(const LimitingDensity& rho, const std::string& path, int points = 801);

cplx stieltjes_m0(const LimitingDensity& rho, cplx z);

struct H0Report {
  double epsilon0 = 0.0;
  cplx worst_z{0.0, 0.0};
  std::vector<double> deviations;
};

// eps0 = max over z of |N^-1 sum_j (mu_j - z)^-1 - m0(z)| for the spectrum mu of H0.
H0Report verify_h0_assumption(const VecD& h0_spectrum, const LimitingDensity& rho,
                              const std::vector<cplx>& z_grid, double eta_floor);

// Grid points x with inf_{|y-x|<=kappa} rho > c and C^{1,1} norm on [x-kappa, x+kappa] <= 1/c.
std::vector<Interval> admissible_energies(const LimitingDensity& rho, double kappa, double c,
                                          double grid = 1e-3);

double predicted_decay(const LimitingDensity& rho, double E0, double lambda, double t);

// lambda^2 t Delta + lambda (1 + lambda^2 t) + (lambda/Delta)(1 + lambda/Delta) + lambda^2 t eps0
double error_budget(double lambda, double t, double delta, double epsilon0);

// x_j with F(x_j) = (j - 1/2)/N.
VecD density_quantiles(const LimitingDensity& rho, int N);

}  // namespace echodyn
