#include <doctest.h>

#include <cmath>

#include "echodyn/ensembles.hpp"
#include "echodyn/mde.hpp"
#include "oracles.hpp"

using namespace echodyn;

namespace {

Deformation balanced(int n) {
  VecD d(n);
  for (int i = 0; i < n; ++i) d[i] = i < n / 2 ? 1.0 : -1.0;
  return Deformation::diagonal(d);
}

}  // namespace

TEST_CASE("solve_mde at D = 0 matches the semicircle") {
  const auto D = Deformation::zero(16);
  const auto s = solve_mde(D, {0, 1});
  CHECK(std::abs(s.m_trace - cplx(0, (std::sqrt(5.0) - 1) / 2)) < 1e-12);
  const auto s2 = solve_mde(D, {0, 2});
  CHECK(std::abs(s2.m_trace - cplx(0, std::sqrt(2.0) - 1)) < 1e-12);
  CHECK(s.residual <= 1e-11);
}

TEST_CASE("scalar deformation shifts the spectral parameter") {
  const double c = 0.7;
  const auto D = Deformation::diagonal(VecD::Constant(8, c));
  for (cplx z : {cplx(0.3, 0.5), cplx(-1.1, 0.05), cplx(2.5, -0.2)}) {
    const auto s = solve_mde(D, SpectralPoint::from(z));
    const MatC M = s.m_matrix();
    const cplx expect = oracle::semicircle_m(z - c);
    CHECK((M - expect * MatC::Identity(8, 8)).norm() < 1e-10);
  }
}

TEST_CASE("solve_mde on a dense deformation agrees with its diagonalization") {
  std::mt19937_64 rng(5);
  const MatC U = haar_unitary(12, rng);
  VecD d(12);
  for (int i = 0; i < 12; ++i) d[i] = -1.0 + 2.0 * i / 11.0;
  const MatC A = U * d.cast<cplx>().asDiagonal() * U.adjoint();
  const Deformation dense(A), diag = Deformation::diagonal(d);
  const auto a = solve_mde(dense, {0.2, 0.3});
  const auto b = solve_mde(diag, {0.2, 0.3});
  CHECK(std::abs(a.m_trace - b.m_trace) < 1e-12);
  const MatC Ma = a.m_matrix();
  const MatC expect = U * b.m_matrix() * U.adjoint();
  CHECK((Ma - expect).norm() / std::sqrt(12.0) < 1e-10);
}

TEST_CASE("solve_mde rejects real spectral parameters") {
  CHECK_THROWS_AS(solve_mde(Deformation::zero(4), {0.5, 0.0}), Error);
}

TEST_CASE("scdos of the semicircle") {
  const auto D = Deformation::zero(4);
  CHECK(scdos(D, 0, 1e-9) == doctest::Approx(1 / kPi).epsilon(1e-8));
  CHECK(scdos(D, 2.0, 1e-10) < 1e-3);
  CHECK(scdos(D, 3.0, 1e-10) < 1e-8);
}

TEST_CASE("scdos of diag(+-1) at the center is positive") {
  const double v = scdos(balanced(8), 0.0, 1e-6);
  CHECK(v > 0);
  // regression baseline from the scalar oracle: Im m(i 1e-6)/pi
  const auto m = oracle::diagonal_mde({-1, 1}, {0, 1e-6});
  CHECK(v == doctest::Approx(((m[0] + m[1]) / 2.0).imag() / kPi).epsilon(1e-6));
}

TEST_CASE("boundary_m closed forms") {
  const auto D = Deformation::zero(4);
  const auto a = boundary_m(D, 0.0);
  CHECK(std::abs(a.m_trace - cplx(0, 1)) < 1e-8);
  CHECK(a.rho == doctest::Approx(1 / kPi).epsilon(1e-8));
  const auto b = boundary_m(D, 1.0);
  CHECK(std::abs(b.m_trace - cplx(-0.5, std::sqrt(3.0) / 2)) < 1e-8);
  const auto c = boundary_m(Deformation::diagonal(VecD::Constant(4, 0.4)), 1.0);
  CHECK(std::abs(c.m_trace - oracle::semicircle_m({0.6, 1e-14})) < 1e-8);
}

TEST_CASE("kappa_bulk of the semicircle") {
  const auto D = Deformation::zero(4);
  const auto b = kappa_bulk(D, 0.1, 1e-3);
  REQUIRE(b.intervals.size() == 1);
  const double edge = std::sqrt(4 - std::pow(0.2 * kPi, 2));
  CHECK(b.intervals[0].lo == doctest::Approx(-edge).epsilon(2e-3));
  CHECK(b.intervals[0].hi == doctest::Approx(edge).epsilon(2e-3));
  CHECK(b.contains(0.0));
  CHECK_FALSE(b.contains(1.95));

  const auto peak = kappa_bulk(D, 1 / kPi - 1e-9, 1e-3);
  REQUIRE(peak.intervals.size() == 1);
  CHECK(std::abs(peak.intervals[0].lo) <= 2e-3);
  CHECK(std::abs(peak.intervals[0].hi) <= 2e-3);

  try {
    kappa_bulk(D, 1.0, 1e-2);
    FAIL("expected EmptyBulk");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyBulk);
  }
}

TEST_CASE("check_admissible") {
  CHECK(check_admissible(Deformation::zero(32), 1.0).admissible);

  const int n = 64;
  VecD d(n);
  for (int i = 0; i < n; ++i) d[i] = -1.0 + 2.0 * i / (n - 1);
  CHECK(check_admissible(Deformation::diagonal(d), 4.0).admissible);

  VecD j(n);
  for (int i = 0; i < n; ++i) j[i] = i < n / 2 ? 0.0 : 3.0;
  const std::vector<int> single;
  const auto r = check_admissible(Deformation::diagonal(j), 2.0, &single);
  CHECK_FALSE(r.admissible);
  CHECK(r.violating_j >= 0);
  CHECK(r.violating_k >= 0);
  CHECK_FALSE(r.message.empty());
}

TEST_CASE("deformation files round trip") {
  std::mt19937_64 rng(3);
  const MatC U = haar_unitary(6, rng);
  VecD d(6);
  d << -1, -0.5, 0, 0.25, 0.5, 1;
  const Deformation D(MatC(U * d.cast<cplx>().asDiagonal() * U.adjoint()));
  const std::string txt = "deformation_roundtrip.txt", bin = "deformation_roundtrip.bin";
  save_deformation_text(D, txt);
  save_deformation_binary(D, bin);
  CHECK((load_deformation(txt).matrix() - D.matrix()).norm() == 0.0);
  CHECK((load_deformation(bin).matrix() - D.matrix()).norm() == 0.0);
  std::remove(txt.c_str());
  std::remove(bin.c_str());
}
