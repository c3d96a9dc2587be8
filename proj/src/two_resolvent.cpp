#include "echodyn/two_resolvent.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace echodyn {

namespace {

const MatD& coupling_of(const MdeSolution& M1, const MdeSolution& M2,
                        std::shared_ptr<const MatD>& hold) {
  hold = M1.D.coupling(M2.D);
  return *hold;
}

cplx trace_square(const MdeSolution& M) {
  const VecD& w = M.D.atoms().weights;
  return (w.cast<cplx>().array() * M.values.array().square()).sum();
}

}  // namespace

PairForms pair_forms(const MdeSolution& M1, const MdeSolution& M2) {
  std::shared_ptr<const MatD> hold;
  const MatD& C = coupling_of(M1, M2, hold);
  const VecD& d1 = M1.D.atoms().values;
  const VecD& d2 = M2.D.atoms().values;
  PairForms f{};
  VecC cv2 = C.cast<cplx>() * M2.values;
  VecC cdv2 = C.cast<cplx>() * (d2.cast<cplx>().array() * M2.values.array()).matrix();
  f.m1m2 = (M1.values.array() * cv2.array()).sum();
  f.m1dm2 = (M1.values.array() * d1.cast<cplx>().array() * cv2.array()).sum() -
            (M1.values.array() * cdv2.array()).sum();
  double dd = 0;
  for (int k = 0; k < C.rows(); ++k)
    for (int l = 0; l < C.cols(); ++l) dd += C(k, l) * (d1[k] - d2[l]) * (d1[k] - d2[l]);
  f.delta2 = dd;
  return f;
}

MatC M12Result::matrix() const { return M1.m_matrix() * M2.m_matrix() / stability; }

M12Result m12(const MdeSolution& M1, const MdeSolution& M2) {
  PairForms f = pair_forms(M1, M2);
  cplx stab = 1.0 - f.m1m2;
  if (std::abs(stab) < kDegeneracyFloor)
    throw Error(ErrorKind::DegenerateStability, "|1 - <M1 M2>| below degeneracy floor");
  return {f.m1m2 / stab, stab, M1, M2};
}

StabilityReading stability_eigenvalue(const MdeSolution& M1, const MdeSolution& M2) {
  PairForms f = pair_forms(M1, M2);
  StabilityReading r{};
  r.eigenvalue = 1.0 - f.m1m2;
  r.delta2 = f.delta2;
  const cplx z1 = M1.z(), z2 = M2.z();
  double s = f.delta2 + std::pow(z1.real() - z2.real(), 2) +
             std::pow(M1.m_trace.imag() + M2.m_trace.imag(), 2);
  if (z1.imag() != 0) s += std::abs(z1.imag() / M1.m_trace.imag());
  if (z2.imag() != 0) s += std::abs(z2.imag() / M2.m_trace.imag());
  r.bound_rhs = std::max(1.0 / s, 1.0);
  r.ratio = (1.0 / std::abs(r.eigenvalue)) / r.bound_rhs;
  return r;
}

ShiftValue shift(const MdeSolution& M1, const MdeSolution& M2) {
  PairForms f = pair_forms(M1, M2);
  if (std::abs(f.m1m2) < kDegeneracyFloor)
    throw Error(ErrorKind::DegenerateDenominator, "|<M1 M2>| below degeneracy floor");
  return {f.m1dm2 / f.m1m2, f.m1m2};
}

ShiftValue shift(const MdeSolution& M1, const MdeSolution& M2, const Deformation& D1,
                 const Deformation& D2) {
  if (M1.D.id() != D1.id() || M2.D.id() != D2.id())
    throw Error(ErrorKind::InvalidArgument, "solutions were computed for different deformations");
  return shift(M1, M2);
}

cplx shift_dz1(const MdeSolution& M1, const MdeSolution& M2) {
  std::shared_ptr<const MatD> hold;
  const MatD& C = coupling_of(M1, M2, hold);
  const VecD& d1 = M1.D.atoms().values;
  const VecD& d2 = M2.D.atoms().values;
  VecC dv1 = M1.values.array().square() / (1.0 - trace_square(M1));
  VecC cv2 = C.cast<cplx>() * M2.values;
  VecC cdv2 = C.cast<cplx>() * (d2.cast<cplx>().array() * M2.values.array()).matrix();
  auto forms = [&](const VecC& a, cplx& ab, cplx& adb) {
    ab = (a.array() * cv2.array()).sum();
    adb = (a.array() * d1.cast<cplx>().array() * cv2.array()).sum() - (a.array() * cdv2.array()).sum();
  };
  cplx ab, adb, dab, dadb;
  forms(M1.values, ab, adb);
  forms(dv1, dab, dadb);
  return (dadb * ab - adb * dab) / (ab * ab);
}

double m_identity_residual(const MdeSolution& M1, const MdeSolution& M2, cplx z1, cplx z2,
                           const Deformation& D1, const Deformation& D2) {
  ShiftValue s = shift(M1, M2, D1, D2);
  cplx stab = 1.0 - s.denominator;
  if (std::abs(stab) < kDegeneracyFloor)
    throw Error(ErrorKind::DegenerateStability, "|1 - <M1 M2>| below degeneracy floor");
  cplx den = z1 - z2 - s.value;
  if (std::abs(den) < kDegeneracyFloor)
    throw Error(ErrorKind::DegenerateDenominator, "z1 - z2 - s below degeneracy floor");
  cplx lhs = s.denominator / stab;
  cplx rhs = (M1.m_trace - M2.m_trace) / den;
  return std::abs(lhs - rhs);
}

namespace {

class StabilityIntegrand {
 public:
  StabilityIntegrand(const Deformation& D, double eta) : D_(D), eta_(eta) {}

  double operator()(double e) {
    ++evaluations;
    MdeSolution s;
    try {
      if (eta_ == 0.0) {
        s = boundary_m(D_, e);
      } else {
        try {
          s = solve_mde(D_, {e, eta_}, {}, have_warm_ ? &warm_ : nullptr);
        } catch (const Error&) {
          s = solve_mde(D_, {e, eta_});
        }
        warm_ = s.values;
        have_warm_ = true;
      }
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
    return 1.0 / std::abs(1.0 - trace_square(s));
  }

  int evaluations = 0;

 private:
  Deformation D_;
  double eta_;
  VecC warm_;
  bool have_warm_ = false;
};

}  // namespace

StabilityIntegral one_body_stability_integral(const Deformation& D, double eta, double lo, double hi,
                                              double step) {
  if (!(eta >= 0) || !(hi > lo) || !(step > 0)) throw Error(ErrorKind::InvalidArgument, "bad integral range");
  StabilityIntegrand g(D, eta);
  const int n = std::max(2, static_cast<int>(std::ceil((hi - lo) / step)));
  std::vector<double> x(n + 1), fx(n + 1);
  for (int i = 0; i <= n; ++i) {
    x[i] = lo + (hi - lo) * i / n;
    fx[i] = g(x[i]);
  }
  std::vector<double> finite;
  for (double v : fx)
    if (std::isfinite(v)) finite.push_back(v);
  if (finite.empty()) throw Error(ErrorKind::QuadratureUnderResolved, "integrand singular on the whole grid");
  std::nth_element(finite.begin(), finite.begin() + finite.size() / 2, finite.end());
  const double median = finite[finite.size() / 2];

  // Breakpoints at the local maxima of the integrand, located by golden-section search,
  // so every singularity or sharp peak sits at an endpoint of a tanh-sinh panel.
  StabilityIntegral out;
  std::vector<double> breaks{lo};
  auto val = [&](double e) {
    const double v = g(e);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  for (int i = 1; i < n; ++i) {
    const double fi = std::isfinite(fx[i]) ? fx[i] : std::numeric_limits<double>::max();
    if (!(fi >= fx[i - 1] && fi >= fx[i + 1] && fi > 3 * median)) continue;
    double a = x[i - 1], b = x[i + 1];
    const double r = 0.5 * (std::sqrt(5.0) - 1);
    double c = b - r * (b - a), d = a + r * (b - a), fc = val(c), fd = val(d);
    for (int it = 0; it < 80 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
      if (fc >= fd) {
        b = d, d = c, fd = fc, c = b - r * (b - a), fc = val(c);
      } else {
        a = c, c = d, fc = fd, d = a + r * (b - a), fd = val(d);
      }
    }
    const double peak = 0.5 * (a + b);
    if (peak > breaks.back()) breaks.push_back(peak);
    if (std::max(fc, fd) > 1e6 * median) ++out.singular_points;
  }
  if (hi > breaks.back()) breaks.push_back(hi);

  boost::math::quadrature::tanh_sinh<double> ts(12);
  auto h = [&](double e) {
    const double v = g(e);
    return std::isfinite(v) ? v : 0.0;
  };
  for (std::size_t k = 1; k < breaks.size(); ++k) {
    double err = 0, l1 = 0;
    const double part = ts.integrate(h, breaks[k - 1], breaks[k], 1e-9, &err, &l1);
    if (err > 1e-5 * std::max(1.0, l1))
      throw Error(ErrorKind::QuadratureUnderResolved,
                  "stability integral error estimate " + std::to_string(err) + " on [" +
                      std::to_string(breaks[k - 1]) + ", " + std::to_string(breaks[k]) + "]");
    out.value += part;
  }
  out.evaluations = g.evaluations;
  return out;
}

}  // namespace echodyn
