#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "echodyn/scenario2.hpp"
#include "oracles.hpp"

using namespace echodyn;

TEST_CASE("Stieltjes transforms") {
  const auto sc = LimitingDensity::semicircle();
  CHECK(std::abs(stieltjes_m0(sc, {0, 1}) - cplx(0, (std::sqrt(5.0) - 1) / 2)) < 1e-12);

  const auto u = LimitingDensity::uniform(-1, 1);
  CHECK(std::abs(stieltjes_m0(u, {0, 2}) - oracle::uniform_stieltjes({0, 2})) < 1e-10);
  CHECK(std::abs(stieltjes_m0(u, {0.3, 0.1}) - oracle::uniform_stieltjes({0.3, 0.1})) < 1e-10);

  std::vector<double> xs, ys;
  for (int i = 0; i <= 400; ++i) {
    xs.push_back(-2.0 + 4.0 * i / 400);
    ys.push_back(oracle::semicircle_density(xs.back()));
  }
  const auto tab = LimitingDensity::tabulated(xs, ys, true);
  CHECK(tab.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(stieltjes_m0(tab, {0, 1}) - stieltjes_m0(sc, {0, 1})) < 1e-3);

  const auto gen = LimitingDensity{"semicircle-callable", sc.evaluate, {}, {}, sc.support};
  CHECK(std::abs(stieltjes_m0(gen, {0.5, 0.5}) - oracle::semicircle_m({0.5, 0.5})) < 1e-8);
}

TEST_CASE("tabulated densities must be normalized") {
  CHECK_THROWS_AS(LimitingDensity::tabulated({0, 1, 2}, {1, 1, 1}), Error);
  const auto d = LimitingDensity::tabulated({0, 1, 2}, {1, 1, 1}, true);
  CHECK(d.total_mass() == doctest::Approx(1.0));
  CHECK(d(0.5) == doctest::Approx(0.5));
  CHECK(d(3.0) == 0.0);
}

TEST_CASE("density tables round trip") {
  const auto u = LimitingDensity::uniform(-1, 1);
  const std::string path = "density_roundtrip.txt";
  save_density_table(u, path, 201);
  const auto back = load_density_table(path, true);
  CHECK(back.total_mass() == doctest::Approx(1.0));
  CHECK(back(0.2) == doctest::Approx(0.5).epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("H0 assumption") {
  const auto sc = LimitingDensity::semicircle();
  const std::vector<cplx> grid{{-1, 0.1}, {0, 0.1}, {1, 0.1}, {0, 1}};
  double prev = 1e300;
  for (int N : {256, 512, 1024}) {
    const auto r = verify_h0_assumption(density_quantiles(sc, N), sc, grid, 0.05);
    CHECK(r.epsilon0 < prev);
    CHECK(r.epsilon0 < 10 * std::log(N) / N);
    prev = r.epsilon0;
  }
  // two atoms at +-1 and a matching two-atom measure approximated by a narrow table
  const std::vector<cplx> far{{0, 50}, {30, 5}};
  const VecD mu = (VecD(2) << -1.0, 1.0).finished();
  const auto pair = LimitingDensity::tabulated({-1.001, -1, -0.999, 0.999, 1, 1.001}, {0, 1, 0, 0, 1, 0}, true);
  CHECK(verify_h0_assumption(mu, pair, far, 0.05).epsilon0 < 1e-6);
  CHECK_THROWS_AS(verify_h0_assumption(mu, sc, {{0, 0.01}}, 0.05), Error);
}

TEST_CASE("admissible energies") {
  const auto sc = LimitingDensity::semicircle();
  const auto iv = admissible_energies(sc, 0.2, 0.05);
  REQUIRE_FALSE(iv.empty());
  bool around_zero = false;
  for (const auto& i : iv) {
    CHECK(i.lo > -2 + 0.2);
    CHECK(i.hi < 2 - 0.2);
    around_zero |= i.lo < 0 && i.hi > 0;
  }
  CHECK(around_zero);
  try {
    admissible_energies(sc, 0.2, 1 / kPi + 0.01);
    FAIL("expected EmptyAdmissibleSet");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyAdmissibleSet);
  }
}

TEST_CASE("predicted decay and error budget") {
  const auto sc = LimitingDensity::semicircle();
  CHECK(predicted_decay(sc, 0.0, 0.1, 50.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(predicted_decay(sc, 0.0, 0.0, 50.0) == 1.0);
  CHECK(error_budget(0.1, 10, 0.2, 0.01) == doctest::Approx(0.881).epsilon(1e-12));
  CHECK(error_budget(0.0, 10, 0.2, 0.01) == 0.0);
  const double T = 1.0;
  double prev = 1e300;
  for (double delta : {0.2, 0.1, 0.05}) {
    const double lambda = delta * delta * 1e-2;
    const double e = error_budget(lambda, T / (lambda * lambda), delta, 0.0);
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("density quantiles") {
  const auto u = LimitingDensity::uniform(-1, 1);
  const VecD q = density_quantiles(u, 4);
  CHECK(q[0] == doctest::Approx(-0.75).epsilon(1e-12));
  CHECK(q[3] == doctest::Approx(0.75).epsilon(1e-12));
  const VecD s = density_quantiles(LimitingDensity::semicircle(), 101);
  CHECK(std::abs(s[50]) < 1e-12);
  for (int i = 1; i < 101; ++i) CHECK(s[i] > s[i - 1]);
}
