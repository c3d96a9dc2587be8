#include "echodyn/contour.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace echodyn {

namespace {

using GL = boost::math::quadrature::gauss<double, 10>;

// Ten Gauss-Legendre nodes/weights on [-1, 1].
struct Rule {
  std::array<double, 10> x, w;
  Rule() {
    const auto& a = GL::abscissa();
    const auto& b = GL::weights();
    for (int i = 0; i < 5; ++i) {
      x[4 - i] = -a[i];
      w[4 - i] = b[i];
      x[5 + i] = a[i];
      w[5 + i] = b[i];
    }
  }
};

const Rule& rule() {
  static const Rule r;
  return r;
}

struct Etas {
  double eta1, eta2;
  std::string tag;
};

Etas choose_etas(const Deformation& D1, const Deformation& D2, double t, double eta0,
                 const RegimeConfig& cfg) {
  const double delta = std::sqrt(delta_squared(D1, D2));
  Etas e;
  e.eta1 = std::min(1.0 / t, eta0 / 2);
  const double by_time = cfg.c_time / t;
  double other = cfg.c_eta0 * eta0;
  if (delta > 0) other = std::min(other, cfg.c_delta * delta);
  if (by_time <= other) {
    e.eta2 = by_time;
    e.tag = t * delta <= cfg.first_regime_t_delta ? "first" : "second";
  } else {
    e.eta2 = other;
    e.tag = "third";
  }
  return e;
}

void add_panel(ContourPath& p, double lo, double hi, const std::function<cplx(double)>& z,
               const std::function<cplx(double)>& dz) {
  const Rule& r = rule();
  const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
  for (int i = 0; i < 10; ++i) {
    double s = mid + half * r.x[i];
    p.nodes.push_back(z(s));
    p.weights.push_back(dz(s) * (half * r.w[i]));
  }
}

// Panels on [a, b] (a < b): width `fine` inside [-S, S], `coarse` outside.
std::vector<std::pair<double, double>> flat_panels(double a, double b, double S, double fine,
                                                   double coarse, int level) {
  std::vector<std::pair<double, double>> out;
  auto split = [&](double lo, double hi, double h) {
    if (!(hi > lo)) return;
    int n = static_cast<int>(std::ceil((hi - lo) / h - 1e-9)) << level;
    n = std::max(n, 1);
    for (int i = 0; i < n; ++i) out.emplace_back(lo + (hi - lo) * i / n, lo + (hi - lo) * (i + 1) / n);
  };
  const double l = std::clamp(-S, a, b), r = std::clamp(S, a, b);
  split(a, l, coarse);
  split(l, r, fine);
  split(r, b, coarse);
  return out;
}

void arc(ContourPath& p, double radius, double shift, double phi_a, double phi_b, double angle,
         int level) {
  int n = std::max(1, static_cast<int>(std::ceil((phi_b - phi_a) / angle - 1e-9))) << level;
  auto z = [&](double phi) { return radius * std::exp(I1 * phi) + I1 * shift; };
  auto dz = [&](double phi) { return I1 * radius * std::exp(I1 * phi); };
  for (int i = 0; i < n; ++i)
    add_panel(p, phi_a + (phi_b - phi_a) * i / n, phi_a + (phi_b - phi_a) * (i + 1) / n, z, dz);
}

MatC solve_nodes(const Deformation& D, const std::vector<cplx>& nodes) {
  const int k = static_cast<int>(D.atoms().values.size());
  MatC V(nodes.size(), k);
  VecC warm;
  double last_sign = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    cplx z = nodes[i];
    if (std::abs(z.imag()) < 1e-12) z = {z.real(), z.imag() < 0 ? -1e-12 : 1e-12};
    const double sign = z.imag() > 0 ? 1.0 : -1.0;
    MdeSolution s;
    try {
      s = solve_mde(D, SpectralPoint::from(z), {}, sign == last_sign ? &warm : nullptr);
    } catch (const Error&) {
      s = solve_mde(D, SpectralPoint::from(z));
    }
    warm = s.values;
    last_sign = sign;
    V.row(i) = s.values.transpose();
  }
  return V;
}

struct Lines {
  cplx first, second;
  long long nodes;
};

Lines evaluate(const Deformation& D1, const Deformation& D2, double E0, double eta0, double t,
               const ContourPath& g1, const ContourPath& g2) {
  const MatC V1 = solve_nodes(D1, g1.nodes);
  const MatC V2 = solve_nodes(D2, g2.nodes);
  const MatD& C = *D1.coupling(D2);
  const MatC CV2T = C.cast<cplx>() * V2.transpose();
  const int n1 = static_cast<int>(g1.nodes.size()), n2 = static_cast<int>(g2.nodes.size());

  const cplx z0(E0, eta0);
  VecC a1(n1), b2(n2), c2(n2);
  for (int i = 0; i < n1; ++i) {
    const cplx z = g1.nodes[i];
    const cplx cauchy = eta0 / ((z - E0) * (z - E0) + eta0 * eta0);
    a1[i] = g1.weights[i] * std::exp(I1 * t * z) * cauchy;
  }
  for (int j = 0; j < n2; ++j) {
    b2[j] = g2.weights[j] * std::exp(-I1 * t * g2.nodes[j]);
    c2[j] = g2.weights[j] * std::exp(I1 * t * (z0 - g2.nodes[j]));
  }

  auto stab_ratio = [](cplx p) {
    const cplx q = 1.0 - p;
    const double nq = std::norm(q);
    if (std::sqrt(nq) < kDegeneracyFloor)
      throw Error(ErrorKind::DegenerateStability, "|1 - <M1 M2>| below degeneracy floor on the contour");
    return p * std::conj(q) / nq;
  };

  VecC y = VecC::Zero(n1);
  constexpr int block = 256;
  MatC P;
  for (int j0 = 0; j0 < n2; j0 += block) {
    const int nb = std::min(block, n2 - j0);
    P.noalias() = V1 * CV2T.middleCols(j0, nb);
    cplx* p = P.data();
    for (Eigen::Index i = 0; i < P.size(); ++i) p[i] = stab_ratio(p[i]);
    y.noalias() += P * b2.segment(j0, nb);
  }
  Lines out;
  cplx acc = 0;
  for (int i = 0; i < n1; ++i) acc += a1[i] * y[i];
  out.first = acc / (-4.0 * kPi * kPi);

  const VecC v0 = solve_mde(D1, {E0, eta0}).values;
  const VecC p0 = CV2T.transpose() * v0;
  cplx acc2 = 0;
  for (int j = 0; j < n2; ++j) acc2 += c2[j] * stab_ratio(p0[j]);
  out.second = acc2 / (4.0 * kPi);
  out.nodes = static_cast<long long>(n1) * n2;
  return out;
}

}  // namespace

ContourSpec build_contours(const Deformation& D1, const Deformation& D2, double t, double eta0,
                           const RegimeConfig& cfg) {
  if (!(t >= 1.0)) throw Error(ErrorKind::InvalidArgument, "t must be >= 1");
  if (!(eta0 > 0)) throw Error(ErrorKind::InvalidArgument, "eta0 must be positive");
  const double norm = std::max(D1.norm(), D2.norm());
  const double supp = norm + 2.0;
  ContourSpec s;
  s.R = cfg.radius > 0 ? cfg.radius : norm + 3.0;
  if (s.R - 1.0 < supp)
    throw Error(ErrorKind::RadiusTooSmall, "R - 1 must cover the supports [-(||D||+2), ||D||+2]");
  Etas e = choose_etas(D1, D2, t, eta0, cfg);
  s.t = t;
  s.eta0 = eta0;
  s.eta1 = e.eta1;
  s.eta2 = e.eta2;
  s.regime = e.tag;
  s.fine_width = std::min({s.eta1, s.eta2, eta0 / 2});
  s.coarse_width = std::min(0.5, kPi / t);
  s.fine_half_width = supp + 0.5;
  s.arc_angle = std::min(kPi / 16, 10.0 * 2 * kPi / (cfg.nodes_per_wavelength * t));
  s.tolerance = cfg.tolerance;
  contour_paths(s, 0, s.gamma1, s.gamma2);
  return s;
}

void contour_paths(const ContourSpec& s, int level, ContourPath& g1, ContourPath& g2) {
  g1 = {};
  g2 = {};
  const double R = s.R;
  {
    const double shift = -s.eta1;
    auto z = [&](double e) { return cplx(e, shift); };
    auto dz = [](double) { return cplx(1.0, 0.0); };
    for (auto [lo, hi] : flat_panels(-2 * R, 2 * R, s.fine_half_width, s.fine_width, s.coarse_width, level))
      add_panel(g1, lo, hi, z, dz);
    arc(g1, 2 * R, shift, 0.0, kPi, s.arc_angle / (2 * R), level);
  }
  {
    const double shift = s.eta2;
    // flat piece runs from R to -R
    auto z = [&](double u) { return cplx(-u, shift); };
    auto dz = [](double) { return cplx(-1.0, 0.0); };
    for (auto [lo, hi] : flat_panels(-R, R, s.fine_half_width, s.fine_width, s.coarse_width, level))
      add_panel(g2, lo, hi, z, dz);
    arc(g2, R, shift, kPi, 2 * kPi, s.arc_angle / R, level);
  }
}

DeterministicAmplitude deterministic_echo_amplitude(const Deformation& D1, const Deformation& D2,
                                                    double E0, double eta0, double t,
                                                    const ContourSpec& spec) {
  if (!(eta0 > 0)) throw Error(ErrorKind::InvalidArgument, "eta0 must be positive");
  if (!(spec.eta1 < eta0)) throw Error(ErrorKind::InvalidArgument, "gamma1 must separate E0 +- i eta0");
  ContourPath g1, g2;
  contour_paths(spec, 0, g1, g2);
  Lines coarse = evaluate(D1, D2, E0, eta0, t, g1, g2);
  contour_paths(spec, 1, g1, g2);
  Lines fine = evaluate(D1, D2, E0, eta0, t, g1, g2);
  DeterministicAmplitude a;
  a.first_line = fine.first;
  a.second_line = fine.second;
  a.value = fine.first + fine.second;
  a.quadrature_error_estimate = std::abs(a.value - (coarse.first + coarse.second));
  a.regime_tag = spec.regime;
  a.nodes = fine.nodes + coarse.nodes;
  if (a.quadrature_error_estimate > spec.tolerance)
    throw Error(ErrorKind::QuadratureUnderResolved,
                "panel-halving difference " + std::to_string(a.quadrature_error_estimate));
  return a;
}

PhasePrediction phase_prediction(const Deformation& D1, const Deformation& D2, double E0, double eta0,
                                 double t, const RegimeConfig& cfg) {
  Etas e = choose_etas(D1, D2, t, eta0, cfg);
  PhasePrediction p;
  p.eta1 = e.eta1;
  p.eta2 = e.eta2;
  p.E2 = inverse_renormalization(D1, D2, E0, e.eta1, e.eta2);
  p.s0 = renormalized_shift(D1, D2, p.E2, e.eta1, e.eta2);
  p.im_m1 = solve_mde(D1, {E0, eta0}).m_trace.imag();
  p.value = std::exp(I1 * t * p.s0) * p.im_m1;
  return p;
}

double cauchy_convolution(double E1, double eta1, double E2, double eta2) {
  const double s = eta1 + eta2, d = E1 - E2;
  return kPi * s / (d * d + s * s);
}

double echo_error_envelope(double t, double delta, double eta0) {
  const double l = std::abs(std::log(delta));
  return (1 + std::log(t)) / t + delta * l + eta0 * l / delta;
}

}  // namespace echodyn
