#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

namespace oracle {

cplx semicircle_m(cplx z) {
  const cplx disc = std::sqrt(z * z - 4.0);
  cplx a = (-z + disc) / 2.0, b = (-z - disc) / 2.0;
  return a.imag() * z.imag() > 0 ? a : b;
}

std::vector<cplx> diagonal_mde(const std::vector<double>& d, cplx z) {
  const double n = static_cast<double>(d.size());
  cplx m = cplx(0, z.imag() > 0 ? 1 : -1);
  for (int it = 0; it < 200000; ++it) {
    cplx next = 0;
    for (double dk : d) next += 1.0 / (dk - z - m);
    next /= n;
    if (std::abs(next - m) < 1e-15) {
      m = next;
      break;
    }
    m = 0.5 * m + 0.5 * next;
  }
  std::vector<cplx> out;
  for (double dk : d) out.push_back(1.0 / (dk - z - m));
  return out;
}

double cauchy_convolution(double E1, double eta1, double E2, double eta2, int panels) {
  const double pi = std::acos(-1.0);
  auto f = [&](double u) {
    const double x = std::tan(u);
    const double sec2 = 1.0 + x * x;
    return eta1 / ((x - E1) * (x - E1) + eta1 * eta1) * eta2 / ((x - E2) * (x - E2) + eta2 * eta2) * sec2;
  };
  const double a = -pi / 2, b = pi / 2, h = (b - a) / panels;
  double s = 0;
  for (int i = 1; i < panels; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

cplx uniform_stieltjes(cplx z) { return 0.5 * std::log((1.0 - z) / (-1.0 - z)); }

double semicircle_density(double e) {
  return std::abs(e) < 2 ? std::sqrt(4 - e * e) / (2 * std::acos(-1.0)) : 0.0;
}

}  // namespace oracle

TEST_CASE("oracle values are frozen") {
  const double golden = (std::sqrt(5.0) - 1) / 2;
  CHECK(std::abs(oracle::semicircle_m({0, 1}) - oracle::cplx(0, 0.6180339887498949)) < 1e-15);
  CHECK(std::abs(oracle::semicircle_m({0, 2}) - oracle::cplx(0, 0.41421356237309515)) < 1e-15);
  CHECK(std::abs(oracle::semicircle_m({1, 1e-14}) - oracle::cplx(-0.5, 0.8660254037844386)) < 1e-12);
  CHECK(golden == doctest::Approx(0.6180339887498949).epsilon(1e-15));
  CHECK(oracle::cauchy_convolution(0, 1, 0, 1) == doctest::Approx(1.5707963267948966).epsilon(1e-12));
  const auto u = oracle::uniform_stieltjes({0, 2});
  CHECK(u.real() == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(u.imag() == doctest::Approx(0.4636476090008061).epsilon(1e-14));
  // <m> = i y with y = b/(1 + b^2), b = 1 + y: y = 1/b for the real root b of b^3 - b^2 - 1 = 0.
  const auto dm = oracle::diagonal_mde({-1, 1}, {0, 1});
  const oracle::cplx avg = (dm[0] + dm[1]) / 2.0;
  CHECK(std::abs(avg.real()) < 1e-15);
  CHECK(avg.imag() == doctest::Approx(0.46557123187676802).epsilon(1e-13));
  const double b = 1 + avg.imag();
  CHECK(b * b * b - b * b - 1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(oracle::semicircle_density(0) == doctest::Approx(0.3183098861837907));
}
