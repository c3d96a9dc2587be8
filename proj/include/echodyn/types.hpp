#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace echodyn {

using cplx = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using MatD = Eigen::MatrixXd;
using VecC = Eigen::VectorXcd;
using VecD = Eigen::VectorXd;

inline constexpr cplx I1{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  NonConvergence,
  ConstraintViolation,
  EmptyBulk,
  ContinuationDiverged,
  DegenerateStability,
  DegenerateDenominator,
  QuadratureUnderResolved,
  NoBracket,
  NewtonStall,
  OutOfRange,
  ExtrapolationUnstable,
  RadiusTooSmall,
  DecompositionFailure,
  ShapeInfeasible,
  EmptyWindow,
  EnergyUnreachable,
  EmptyAdmissibleSet,
  ConfigInvalid,
  ResourceExceeded,
  InvalidArgument,
  Io,
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Spectral parameter z = e + i*eta.
struct SpectralPoint {
  double e = 0.0;
  double eta = 0.0;
  cplx z() const { return {e, eta}; }
  static SpectralPoint from(cplx z) { return {z.real(), z.imag()}; }
};

}  // namespace echodyn
