#include "echodyn/shift_calculus.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>

namespace echodyn {

MdeSolution lower_solution(const Deformation& D, double e, double eta) {
  if (eta > 0) return solve_mde(D, {e, -eta});
  MdeSolution s = boundary_m(D, e);
  s.values = s.values.conjugate();
  s.m_trace = std::conj(s.m_trace);
  return s;
}

MdeSolution upper_solution(const Deformation& D, double e, double eta) {
  if (eta > 0) return solve_mde(D, {e, eta});
  return boundary_m(D, e);
}

RenormalizationResult energy_renormalization(const Deformation& D1, const Deformation& D2, double E2,
                                             double eta1, double eta2,
                                             const RenormalizationOptions& opt) {
  if (eta1 < 0 || eta2 < 0) throw Error(ErrorKind::InvalidArgument, "eta1, eta2 must be >= 0");
  const MdeSolution M2 = upper_solution(D2, E2, eta2);
  const double delta = std::sqrt(delta_squared(D1, D2));
  const double half = std::max(opt.bracket_constant * delta, 1e-12);

  RenormalizationResult r;
  r.bracket = {E2 - half, E2 + half};

  struct Eval {
    double h, dh;
    cplx s;
  };
  auto eval = [&](double e1) {
    MdeSolution M1 = lower_solution(D1, e1, eta1);
    ShiftValue s = shift(M1, M2);
    return Eval{e1 - E2 - s.value.real(), 1.0 - shift_dz1(M1, M2).real(), s.value};
  };

  double x = E2;
  Eval ex = eval(x);
  if (std::abs(ex.h) <= opt.tol) {
    r.f_value = x;
    r.s0 = ex.s;
    r.residual = std::abs(ex.h);
    return r;
  }
  double lo = r.bracket.lo, hi = r.bracket.hi;
  Eval elo = eval(lo), ehi = eval(hi);
  if (!(elo.h < 0 && ehi.h > 0))
    throw Error(ErrorKind::NoBracket, "h(E1) has no sign change on [E2 - C*Delta, E2 + C*Delta]");
  if (ex.h < 0) lo = x; else hi = x;

  for (int it = 1; it <= opt.max_iter; ++it) {
    r.newton_iterations = it;
    double next = ex.dh > 0 ? x - ex.h / ex.dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
    ex = eval(x);
    if (std::abs(ex.h) <= opt.tol) {
      r.f_value = x;
      r.s0 = ex.s;
      r.residual = std::abs(ex.h);
      return r;
    }
    if (ex.h < 0) lo = x; else hi = x;
    if (hi - lo < 1e-15 * (1 + std::abs(x))) break;
  }
  throw Error(ErrorKind::NewtonStall, "energy renormalization did not reach tolerance");
}

cplx renormalized_shift(const Deformation& D1, const Deformation& D2, double E2, double eta1,
                        double eta2, const RenormalizationOptions& opt) {
  return energy_renormalization(D1, D2, E2, eta1, eta2, opt).s0;
}

double inverse_renormalization(const Deformation& D1, const Deformation& D2, double E0, double eta1,
                               double eta2, const RenormalizationOptions& opt) {
  const double delta = std::sqrt(delta_squared(D1, D2));
  if (delta == 0.0) return E0;
  const double half = opt.bracket_constant * delta;
  auto g = [&](double e2) { return energy_renormalization(D1, D2, e2, eta1, eta2, opt).f_value - E0; };
  double a = E0 - half, b = E0 + half;
  double ga = g(a), gb = g(b);
  if (!(ga < 0 && gb > 0)) throw Error(ErrorKind::OutOfRange, "E0 outside the image of f on the bracket");
  std::uintmax_t max_iter = 200;
  auto tol = [](double x, double y) { return std::abs(x - y) < 1e-13; };
  auto root = boost::math::tools::toms748_solve(g, a, b, ga, gb, tol, max_iter);
  double e2 = 0.5 * (root.first + root.second);
  if (std::abs(g(e2)) > opt.tol) throw Error(ErrorKind::OutOfRange, "inverse renormalization residual above tolerance");
  return e2;
}

DecayParameters gamma_rate(const Deformation& D1, const Deformation& D2, double E0,
                           const GammaOptions& opt) {
  DecayParameters p;
  p.E0 = E0;
  const double delta = std::sqrt(delta_squared(D1, D2));
  if (delta == 0.0) return p;
  for (int j = 0; j < 3; ++j) {
    double eta = delta * opt.ladder_base / double(1 << j);
    double e2 = inverse_renormalization(D1, D2, E0, eta, eta, opt.renorm);
    cplx s0 = renormalized_shift(D1, D2, e2, eta, eta, opt.renorm);
    p.ladder.push_back(eta);
    p.ladder_E2.push_back(e2);
    p.ladder_im_s0.push_back(s0.imag());
  }
  const auto& x = p.ladder;
  const auto& y = p.ladder_im_s0;
  double mx = (x[0] + x[1] + x[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int j = 0; j < 3; ++j) {
    sxy += (x[j] - mx) * (y[j] - my);
    sxx += (x[j] - mx) * (x[j] - mx);
  }
  double slope = sxy / sxx;
  double intercept = my - slope * mx;
  auto two_point = [&](int i, int k) { return y[i] - (y[k] - y[i]) / (x[k] - x[i]) * x[i]; };
  double a01 = two_point(0, 1), a12 = two_point(1, 2);
  p.Gamma = 2 * intercept;
  p.extrapolation_residual = 2 * std::abs(a01 - a12);
  if (std::abs(a01 - a12) > opt.max_disagreement * std::abs(intercept))
    throw Error(ErrorKind::ExtrapolationUnstable, "ladder extrapolations disagree by more than 10%");
  return p;
}

DecayParameters parabolic_coefficient(const Deformation& D1, const Deformation& D2, double E0,
                                      double eta0) {
  MdeSolution M1 = solve_mde(D1, {E0, eta0});
  auto C = D1.coupling(D2);
  const VecD& d1 = D1.atoms().values;
  const VecD& d2 = D2.atoms().values;
  VecD p = M1.values.imag() / M1.m_trace.imag();
  double first = 0, second = 0;
  for (int k = 0; k < C->rows(); ++k)
    for (int l = 0; l < C->cols(); ++l) {
      double diff = d2[l] - d1[k];
      first += (*C)(k, l) * p[k] * diff;
      second += (*C)(k, l) * p[k] * diff * diff;
    }
  DecayParameters out;
  out.E0 = E0;
  out.eta0 = eta0;
  out.gamma = std::max(0.0, second - first * first);
  return out;
}

}  // namespace echodyn
