#include <doctest.h>

#include <cmath>

#include "echodyn/contour.hpp"
#include "echodyn/ensembles.hpp"
#include "oracles.hpp"

using namespace echodyn;

TEST_CASE("contour geometry") {
  const auto D1 = Deformation::diagonal(VecD::LinSpaced(8, -0.5, 0.5));
  const auto D2 = Deformation::zero(8);
  const auto s = build_contours(D1, D2, 10.0, 0.05);
  CHECK(s.R == doctest::Approx(3.5));
  CHECK(s.eta1 == doctest::Approx(0.025));
  CHECK(build_contours(D1, D2, 100.0, 0.05).eta1 == doctest::Approx(0.01));
  CHECK_FALSE(s.gamma1.nodes.empty());
  CHECK(s.gamma1.nodes.size() == s.gamma1.weights.size());
  auto winding = [](const ContourPath& g, cplx p) {
    cplx w = 0;
    for (std::size_t k = 0; k < g.nodes.size(); ++k) w += g.weights[k] / (g.nodes[k] - p);
    return w / cplx(0, 2 * kPi);
  };
  CHECK(std::abs(std::abs(winding(s.gamma1, {0.0, 0.05})) - 1.0) < 1e-6);
  CHECK(std::abs(winding(s.gamma1, {0.0, -0.05})) < 1e-6);
  CHECK(s.arc_angle <= 2 * kPi / 10.0);

  RegimeConfig small;
  small.radius = 2.0;
  CHECK_THROWS_AS(build_contours(D1, D2, 10.0, 0.05, small), Error);
  CHECK_THROWS_AS(build_contours(D1, D2, 0.5, 0.05), Error);
}

TEST_CASE("regime tags") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, 0.2, 8);
  CHECK(build_contours(D1, D2, 2.0, 0.05).regime == "third");
  CHECK(build_contours(D1, D2, 200.0, 1.0).regime == "second");
  CHECK(build_contours(D1, D1, 100.0, 1.0).regime == "first");
  RegimeConfig loose;
  loose.c_delta = 1.0;
  CHECK(build_contours(D1, D2, 20.0, 1.0, loose).regime == "first");
}

TEST_CASE("Cauchy convolution") {
  CHECK(cauchy_convolution(0, 1, 0, 1) == doctest::Approx(kPi / 2).epsilon(1e-12));
  for (auto [a, b, c, d] : {std::array<double, 4>{0.3, 0.2, -0.5, 0.7}, {1.0, 0.05, 1.1, 0.01}}) {
    CHECK(cauchy_convolution(a, b, c, d) == doctest::Approx(oracle::cauchy_convolution(a, b, c, d)).epsilon(1e-8));
  }
  CHECK(cauchy_convolution(0, 1, 1e4, 1) < 1e-7);
}

TEST_CASE("error envelope") {
  const double d = 0.2, e = 0.02;
  CHECK(echo_error_envelope(1.0, d, e) ==
        doctest::Approx(1.0 + d * std::abs(std::log(d)) + e * std::abs(std::log(d)) / d));
}

TEST_CASE("no decay without deformation difference") {
  const auto D = Deformation::diagonal(VecD::LinSpaced(8, -0.5, 0.5));
  const double eta0 = 0.05, t = 1.0;
  const auto spec = build_contours(D, D, t, eta0);
  const auto amp = deterministic_echo_amplitude(D, D, 0.1, eta0, t, spec);
  const double im = solve_mde(D, {0.1, eta0}).im_trace();
  CHECK(std::abs(amp.value) / im == doctest::Approx(1.0).epsilon(10 * amp.quadrature_error_estimate / im + 1e-6));
  const auto pred = phase_prediction(D, D, 0.1, eta0, t);
  CHECK(std::abs(pred.value) == doctest::Approx(im).epsilon(1e-12));
  CHECK(std::abs(pred.s0) < 1e-15);
}

TEST_CASE("phase prediction at t = 1/Delta^2") {
  const double delta = 0.2, eta0 = delta / (4 * std::abs(std::log(delta)));
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, delta, 8);
  const auto p = phase_prediction(D1, D2, 0.0, eta0, 25.0);
  CHECK(std::abs(p.value) == doctest::Approx(p.im_m1 * std::exp(-25.0 * p.s0.imag())).epsilon(1e-12));
  CHECK(std::abs(p.value) / p.im_m1 > 0.1);
  CHECK(std::abs(p.value) / p.im_m1 < 0.9);
}

TEST_CASE("deterministic amplitude follows the phase law and the second line is small") {
  const double delta = 0.2, eta0 = delta / (4 * std::abs(std::log(delta)));
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, delta, 8);
  for (double t : {10.0, 20.0}) {
    const auto spec = build_contours(D1, D2, t, eta0);
    const auto a = deterministic_echo_amplitude(D1, D2, 0.0, eta0, t, spec);
    const auto p = phase_prediction(D1, D2, 0.0, eta0, t);
    CHECK(std::abs(a.value - p.value) / p.im_m1 <= echo_error_envelope(t, delta, eta0));
    CHECK(std::abs(a.second_line) * t <= 5.0);
    CHECK(std::abs(a.first_line + a.second_line - a.value) <= 1e-12 * (1 + std::abs(a.value)));
  }
}
