#include <doctest.h>

#include <cmath>

#include "echodyn/ensembles.hpp"
#include "echodyn/two_resolvent.hpp"
#include "oracles.hpp"

using namespace echodyn;

namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

Deformation balanced(int n) {
  VecD d(n);
  for (int i = 0; i < n; ++i) d[i] = i < n / 2 ? 1.0 : -1.0;
  return Deformation::diagonal(d);
}

}  // namespace

TEST_CASE("m12 golden-ratio cases") {
  const auto D = Deformation::zero(8);
  const auto up = solve_mde(D, {0, 1}), dn = solve_mde(D, {0, -1});
  const auto r = m12(up, dn);
  CHECK(std::abs(r.trace - cplx(kGolden, 0)) < 1e-12);
  const auto same = m12(up, up);
  const cplx m2 = up.m_trace * up.m_trace;
  CHECK(std::abs(same.trace - m2 / (1.0 - m2)) < 1e-12);
  CHECK(same.trace.real() == doctest::Approx(-0.27639320225002106).epsilon(1e-10));
  CHECK((r.matrix() - r.trace * MatC::Identity(8, 8)).norm() < 1e-12);
}

TEST_CASE("stability eigenvalue") {
  const auto D = Deformation::zero(8);
  const auto up = solve_mde(D, {0, 1}), dn = solve_mde(D, {0, -1});
  CHECK(std::abs(stability_eigenvalue(up, dn).eigenvalue - cplx(kGolden, 0)) < 1e-12);
  CHECK(std::abs(stability_eigenvalue(up, up).eigenvalue - cplx(1.3819660112501051, 0)) < 1e-12);
}

TEST_CASE("stability eigenvalue vanishes linearly in eta at conjugate points") {
  const auto D = balanced(16);
  for (double eta : {1e-2, 1e-3, 1e-4}) {
    const auto a = solve_mde(D, {0.3, eta}), b = solve_mde(D, {0.3, -eta});
    const double im = a.im_trace();
    const double pred = eta / (eta + im);
    CHECK(std::abs(stability_eigenvalue(a, b).eigenvalue) == doctest::Approx(pred).epsilon(1e-8));
  }
}

TEST_CASE("shift vanishes for equal deformations") {
  const auto D = balanced(16);
  const auto a = solve_mde(D, {0.1, 0.2}), b = solve_mde(D, {-0.3, -0.4});
  CHECK(shift(a, b).value == cplx(0, 0));
}

TEST_CASE("shift is second order in a traceless perturbation") {
  const int n = 16;
  VecD dir(n);
  for (int i = 0; i < n; ++i) dir[i] = i % 2 ? -1.0 : 1.0;
  const auto D1 = Deformation::zero(n);
  double prev = 0;
  for (double eps : {0.08, 0.04, 0.02}) {
    const auto D2 = Deformation::diagonal(eps * dir);
    const auto a = solve_mde(D1, {0.2, -0.05}), b = solve_mde(D2, {0.2, 0.05});
    const double s = std::abs(shift(a, b).value);
    if (prev > 0) CHECK(prev / s == doctest::Approx(4.0).epsilon(0.05));
    prev = s;
  }
}

TEST_CASE("m identity residual") {
  const auto D = Deformation::zero(8);
  const auto up = solve_mde(D, {0, 1}), dn = solve_mde(D, {0, -1});
  CHECK(m_identity_residual(up, dn, {0, 1}, {0, -1}, D, D) < 1e-12);

  const auto B = balanced(8);
  const auto p = solve_mde(B, {0.4, 0.3}), q = solve_mde(B, {-0.2, -0.7});
  CHECK(m_identity_residual(p, q, {0.4, 0.3}, {-0.2, -0.7}, B, B) < 1e-10);

  const auto [D1, D2] = sample_deformation_pair(PairShape::Rotated, 0.2, 32, 9);
  MdeOptions tight;
  tight.tol = 1e-14;
  const auto r1 = solve_mde(D1, {0.1, 0.02}, tight), r2 = solve_mde(D2, {0.1, -0.02}, tight);
  CHECK(m_identity_residual(r1, r2, {0.1, 0.02}, {0.1, -0.02}, D1, D2) < 1e-10);
}

TEST_CASE("one-body stability integral") {
  const auto D = Deformation::zero(4);
  const auto s0 = one_body_stability_integral(D, 0.0, -2, 2);
  CHECK(s0.value == doctest::Approx(kPi).epsilon(1e-6));
  const auto s1 = one_body_stability_integral(D, 1.0, -2, 2);
  CHECK(std::isfinite(s1.value));
  CHECK(s1.value <= s0.value + 4.0);

  // diag(+-1) eta ladder stays bounded; baseline 6.5586 at eta = 0
  const auto B = balanced(64);
  double lo = 1e300, hi = 0;
  for (double eta : {1e-2, 1e-4, 1e-6}) {
    const double v = one_body_stability_integral(B, eta, -3, 3).value;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(hi < 7.0);
  CHECK((hi - lo) / hi < 0.1);
}
