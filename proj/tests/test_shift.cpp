#include <doctest.h>

#include <cmath>

#include "echodyn/ensembles.hpp"
#include "echodyn/shift_calculus.hpp"
#include "oracles.hpp"

using namespace echodyn;

TEST_CASE("renormalization is trivial for equal deformations") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, 0.0, 16);
  for (double E2 : {-0.5, 0.0, 0.8}) {
    const auto r = energy_renormalization(D1, D1, E2, 0.01, 0.01);
    CHECK(r.f_value == E2);
    CHECK(r.s0 == cplx(0, 0));
    CHECK(inverse_renormalization(D1, D1, E2, 0.01, 0.01) == E2);
  }
  CHECK(gamma_rate(D1, D1, 0.0).Gamma == 0.0);
  CHECK(parabolic_coefficient(D1, D1, 0.0, 0.05).gamma == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("renormalization root certificate and bounds") {
  const double delta = 0.1;
  const auto [D1, D2] = sample_deformation_pair(PairShape::Rotated, delta, 32, 17);
  const double eta = delta / 16;
  for (double E2 : {-0.6, 0.0, 0.4}) {
    const auto r = energy_renormalization(D1, D2, E2, eta, eta);
    const auto M1 = lower_solution(D1, r.f_value, eta);
    const auto M2 = upper_solution(D2, E2, eta);
    CHECK(std::abs(r.f_value - E2 - shift(M1, M2).value.real()) <= 1e-10);
    CHECK(std::abs(r.f_value - E2) <= 2 * delta);
    CHECK(r.s0.imag() > 0);

    const double h = 1e-4;
    const double fp = energy_renormalization(D1, D2, E2 + h, eta, eta).f_value;
    const double fm = energy_renormalization(D1, D2, E2 - h, eta, eta).f_value;
    CHECK(std::abs((fp - fm) / (2 * h) - 1) <= 2 * delta);
    const cplx sp = renormalized_shift(D1, D2, E2 + h, eta, eta);
    const cplx sm = renormalized_shift(D1, D2, E2 - h, eta, eta);
    CHECK(std::abs(sp - sm) / (2 * h) <= 2 * delta);
  }
}

TEST_CASE("inverse renormalization round trip") {
  const double delta = 0.1;
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, delta, 32);
  const double eta = delta / 16;
  const double E0 = 0.3;
  const double E2 = inverse_renormalization(D1, D2, E0, eta, eta);
  CHECK(std::abs(E2 - E0) <= 2 * delta);
  CHECK(std::abs(energy_renormalization(D1, D2, E2, eta, eta).f_value - E0) <= 1e-10);
}

TEST_CASE("renormalization throws NoBracket when the bracket is too narrow") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, 0.2, 16);
  RenormalizationOptions opt;
  opt.bracket_constant = 1e-6;
  try {
    energy_renormalization(D1, D2, 0.7, 0.01, 0.01, opt);
    FAIL("expected NoBracket");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoBracket);
  }
}

TEST_CASE("Im s0 scales as Delta^2") {
  // diag(+-1) has a cusp at 0, so its bulk point is taken at 1.2
  for (auto shape : {PairShape::ZeroPlusDirection, PairShape::BalancedDiagonal}) {
    const double E = shape == PairShape::ZeroPlusDirection ? 0.0 : 1.2;
    double lo = 1e300, hi = 0;
    for (double delta : {0.05, 0.1, 0.2}) {
      const auto [D1, D2] = sample_deformation_pair(shape, delta, 32);
      const double v = renormalized_shift(D1, D2, E, delta / 16, delta / 16).imag() / (delta * delta);
      CHECK(v > 0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi / lo < 2.0);
  }
}

TEST_CASE("gamma rate ladder consistency") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, 0.1, 32);
  const auto a = gamma_rate(D1, D2, 0.2);
  GammaOptions opt;
  opt.ladder_base = 1.0 / 16;
  const auto b = gamma_rate(D1, D2, 0.2, opt);
  CHECK(a.Gamma > 0);
  CHECK(a.Gamma == doctest::Approx(b.Gamma).epsilon(0.05));
  CHECK(a.ladder.size() == 3);
  double lo = 1e300, hi = 0;
  for (double delta : {0.05, 0.1, 0.2}) {
    const auto [E1, E2] = sample_deformation_pair(PairShape::BalancedDiagonal, delta, 32);
    const double g = gamma_rate(E1, E2, 0.2).Gamma / (delta * delta);
    lo = std::min(lo, g);
    hi = std::max(hi, g);
  }
  CHECK(hi / lo < 2.0);
}

TEST_CASE("parabolic coefficient") {
  const double delta = 0.2;
  const auto [Z, D] = sample_deformation_pair(PairShape::ZeroPlusDirection, delta, 64);
  CHECK(parabolic_coefficient(Z, D, 0.3, 0.05).gamma == doctest::Approx(delta * delta).epsilon(1e-12));

  // diagonal pair: P_k = Im m_k / <Im m>, gamma = <(d - <P d>)^2 P> with d = D2 - D1
  const auto [B1, B2] = sample_deformation_pair(PairShape::BalancedDiagonal, delta, 16);
  const VecD d1 = B1.matrix().diagonal().real(), d2 = B2.matrix().diagonal().real();
  const auto m = oracle::diagonal_mde(std::vector<double>(d1.data(), d1.data() + 16), {1.0, 0.05});
  double im = 0;
  for (auto v : m) im += v.imag() / 16;
  double pd = 0;
  for (int k = 0; k < 16; ++k) pd += m[k].imag() / im * (d2[k] - d1[k]) / 16;
  double expect = 0;
  for (int k = 0; k < 16; ++k) expect += std::pow(d2[k] - d1[k] - pd, 2) * m[k].imag() / im / 16;
  const double g = parabolic_coefficient(B1, B2, 1.0, 0.05).gamma;
  CHECK(g == doctest::Approx(expect).epsilon(1e-9));
  CHECK(g > 0.25 * delta * delta);
  CHECK(g < 4 * delta * delta);
}
