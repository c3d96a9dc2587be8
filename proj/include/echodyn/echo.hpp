#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "echodyn/ensembles.hpp"
#include "echodyn/mde.hpp"

namespace echodyn {

struct EchoCurve {
  std::vector<double> times;
  std::vector<cplx> amplitude;   // sample mean of the normalized amplitude
  std::vector<double> modulus2;  // sample mean of |amplitude|^2
  std::vector<double> stderr_;   // std of |amplitude|^2 over samples / sqrt(n)
  int n_samples = 0;
  std::vector<std::vector<double>> per_sample;  // |amplitude|^2, [sample][time]
  std::map<std::string, std::string> params;
};

struct SamplingOptions {
  SymmetryClass symmetry_class = SymmetryClass::ComplexHermitian;
  EntryLaw entry_law = EntryLaw::Gaussian;
  int workers = 1;
};

// One Monte-Carlo pass over shared samples W; every request reuses the same spectral data.
struct EchoRequest {
  double E0 = 0.0;
  double eta0 = 0.0;
  std::vector<double> times;
};
struct ProcessRequest {
  double E0 = 0.0;
  double eta0 = 0.0;
  double t = 0.0;
  std::vector<double> s_grid;
};
struct ScrambleRequest {
  double delta = 0.0;
  double E0 = 0.0;
  double eta0 = 0.0;
  std::vector<double> times;
};

struct ScenarioOneBatch {
  std::vector<EchoRequest> echoes;
  std::vector<ProcessRequest> processes;
  std::vector<ScrambleRequest> scrambled;
};

struct ScenarioOneResult {
  std::vector<EchoCurve> echoes;
  std::vector<EchoCurve> processes;
  std::vector<EchoCurve> scrambled;
};

ScenarioOneResult run_scenario_one(const Deformation& D1, const Deformation& D2,
                                   const ScenarioOneBatch& batch, int n_samples, std::uint64_t seed,
                                   const SamplingOptions& opt = {});

EchoCurve averaged_echo(const Deformation& D1, const Deformation& D2, double E0, double eta0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt = {});

EchoCurve echo_process(const Deformation& D1, const Deformation& D2, double E0, double eta0, double t,
                       const std::vector<double>& s_grid, int n_samples, std::uint64_t seed,
                       const SamplingOptions& opt = {});

EchoCurve scrambled_averaged_echo(const Deformation& D1, const Deformation& D2, double delta,
                                  double E0, double eta0, const std::vector<double>& times,
                                  int n_samples, std::uint64_t seed, const SamplingOptions& opt = {});

// J1(2 delta) / delta, continuous at 0.
double bessel_phi(double delta);

enum class CoefficientLaw { Gaussian, Uniform };

struct LocalizedState {
  VecC vector;
  double energy = 0.0;
  Interval window;
  std::vector<int> indices;  // eigenvalue indices of H0 inside the window
  VecC coefficients;         // in the eigenbasis restricted to the window
};

LocalizedState prepare_localized_state(const SpectralData& S0, double E0, double delta,
                                       std::uint64_t seed,
                                       CoefficientLaw law = CoefficientLaw::Gaussian);

EchoCurve fidelity_echo(const SpectralData& S0, double lambda, const LocalizedState& psi0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt = {});
EchoCurve fidelity_echo(const MatC& H0, double lambda, const LocalizedState& psi0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt = {});

EchoCurve scrambled_fidelity_echo(const SpectralData& S0, double lambda, double delta,
                                  const LocalizedState& psi0, const std::vector<double>& times,
                                  int n_samples, std::uint64_t seed, const SamplingOptions& opt = {});

struct LawCheck {
  cplx deterministic{0.0, 0.0};  // <M12>
  std::vector<double> deviations;
  double mean = 0.0;
  double max = 0.0;
  double stderr_ = 0.0;
};

LawCheck two_resolvent_law_check(const Deformation& D1, const Deformation& D2, cplx z1, cplx z2,
                                 int n_samples, std::uint64_t seed, const SamplingOptions& opt = {});

struct RateFit {
  double value = 0.0;
  double stderr_ = 0.0;
  double intercept = 0.0;
  int points = 0;
};

// gamma-hat = c/a from a weighted fit mod2 = a - c t^2 (+ e t^4) on [0, t_max].
RateFit fit_short_time_curvature(const EchoCurve& c, double t_max = 0.3, bool quartic = true);
// -slope of a weighted linear fit of log mod2 on [t_lo, t_hi].
RateFit fit_exponential_rate(const EchoCurve& c, double t_lo, double t_hi);
// Mean of mod2 over t >= t_from.
RateFit plateau(const EchoCurve& c, double t_from);

std::vector<double> linspace(double a, double b, int n);

}  // namespace echodyn
