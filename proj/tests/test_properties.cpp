#include <doctest.h>

#include <cmath>
#include <random>

#include "echodyn/contour.hpp"
#include "echodyn/echo.hpp"
#include "echodyn/scenario2.hpp"
#include "echodyn/stats.hpp"
#include "oracles.hpp"

using namespace echodyn;

namespace {

Deformation random_traceless(int n, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g;
  MatC A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = cplx(g(rng), g(rng));
  MatC H = 0.5 * (A + A.adjoint());
  H -= (H.trace() / double(n)) * MatC::Identity(n, n);
  H *= scale / std::sqrt((H * H).trace().real() / n);
  return Deformation(H);
}

cplx random_z(std::mt19937_64& rng, double im_lo, double im_hi, int sign) {
  std::uniform_real_distribution<double> re(-2.5, 2.5), im(std::log(im_lo), std::log(im_hi));
  return {re(rng), sign * std::exp(im(rng))};
}

}  // namespace

TEST_CASE("MDE solutions: residual, half-plane, conjugation, norm bound") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const auto D = random_traceless(8, rng, 0.8);
    const cplx z = random_z(rng, 1e-3, 3.0, trial % 2 ? 1 : -1);
    MdeOptions opt;
    const auto s = solve_mde(D, SpectralPoint::from(z), opt);
    const MatC M = s.m_matrix();
    const MatC lhs = -M.inverse();
    const MatC rhs = z * MatC::Identity(8, 8) - D.matrix() + s.m_trace * MatC::Identity(8, 8);
    CHECK((lhs - rhs).norm() / std::sqrt(8.0) <= 10 * opt.tol * std::max(1.0, lhs.norm()));

    const MatC imM = (M - M.adjoint()) / cplx(0, 2);
    const VecD ev = Eigen::SelfAdjointEigenSolver<MatC>(imM).eigenvalues();
    if (z.imag() > 0) CHECK(ev.minCoeff() > 0);
    else CHECK(ev.maxCoeff() < 0);

    const auto c = solve_mde(D, SpectralPoint::from(std::conj(z)));
    CHECK((c.m_matrix() - M.adjoint()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(Eigen::JacobiSVD<MatC>(M).singularValues()(0) <= 10.0);
  }
}

TEST_CASE("MDE for diagonal deformations matches the scalar oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> d(12);
    for (auto& x : d) x = u(rng);
    const cplx z = random_z(rng, 0.05, 2.0, 1);
    const auto s = solve_mde(Deformation::diagonal(Eigen::Map<VecD>(d.data(), 12)), SpectralPoint::from(z));
    const auto m = oracle::diagonal_mde(d, z);
    const MatC M = s.m_matrix();
    for (int k = 0; k < 12; ++k) CHECK(std::abs(M(k, k) - m[k]) <= 1e-10);
  }
}

TEST_CASE("MDE at D = 0 matches the semicircle on a grid") {
  const auto D = Deformation::zero(3);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const cplx z{-3.0 + 6.0 * i / 9, 0.01 * std::pow(300.0, j / 9.0)};
      CHECK(std::abs(solve_mde(D, SpectralPoint::from(z)).m_trace - oracle::semicircle_m(z)) <= 1e-10);
    }
}

TEST_CASE("two-resolvent invariants on random tuples") {
  std::mt19937_64 rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto D1 = random_traceless(6, rng, 0.5);
    const auto D2 = random_traceless(6, rng, 0.5);
    const cplx z1 = random_z(rng, 0.01, 2.0, 1);
    const cplx z2 = random_z(rng, 0.01, 2.0, trial % 2 ? 1 : -1);
    const auto M1 = solve_mde(D1, SpectralPoint::from(z1));
    const auto M2 = solve_mde(D2, SpectralPoint::from(z2));
    const auto pf = pair_forms(M1, M2);
    CHECK(std::abs(pf.m1m2) <= 1.0 + 1e-12);
    CHECK(m_identity_residual(M1, M2, z1, z2, D1, D2) <= 1e-10);
    const auto st = stability_eigenvalue(M1, M2);
    CHECK(std::isfinite(st.ratio));
    worst = std::max(worst, st.ratio);
    CHECK(1.0 / std::abs(st.eigenvalue) <= 10.0 / std::norm(z1 - z2) + 10.0);
  }
  CHECK(worst < 10.0);
}

TEST_CASE("shift smallness and positivity in the opposite half-plane regime") {
  for (double delta : {0.05, 0.1, 0.2}) {
    for (auto shape : {PairShape::ZeroPlusDirection, PairShape::BalancedDiagonal, PairShape::Rotated}) {
      const auto [D1, D2] = sample_deformation_pair(shape, delta, 16, 4);
      for (double E : {-0.5, 0.0, 0.5}) {
        const auto M1 = solve_mde(D1, {E, -delta / 16});
        const auto M2 = solve_mde(D2, {E, delta / 16});
        CHECK(std::abs(shift(M1, M2).value) <= 2.0 * delta);
        CHECK(renormalized_shift(D1, D2, E, delta / 16, delta / 16).imag() > 0);
      }
    }
  }
}

TEST_CASE("gamma matches the curvature of the sampled short-time echo") {
  const double delta = 0.2, eta0 = 0.2, h = 0.01;
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, delta, 512);
  const double gamma = parabolic_coefficient(D1, D2, 0.3, eta0).gamma;
  const auto c = averaged_echo(D1, D2, 0.3, eta0, {-h, 0.0, h}, 2, 77);
  double fd = 0;
  for (const auto& row : c.per_sample) fd += -(row[0] - 2 * row[1] + row[2]) / (2 * h * h) / row[1];
  fd /= c.per_sample.size();
  CHECK(fd == doctest::Approx(gamma).epsilon(0.05));
}

TEST_CASE("echo amplitude is conjugated by time reversal") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::Rotated, 0.2, 48, 5);
  const auto c = averaged_echo(D1, D2, 0.0, 0.1, {-3.0, 3.0}, 2, 6);
  CHECK(std::abs(c.amplitude[0] - std::conj(c.amplitude[1])) <= 1e-12);
}

TEST_CASE("unitarity at equal deformations") {
  const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, 0.0, 256);
  const auto c = averaged_echo(D1, D1, 0.0, 0.5, {0.0, 10.0}, 12, 9);
  std::vector<double> mod;
  for (const auto& row : c.per_sample) mod.push_back(std::sqrt(row[1]));
  const auto ms = mean_stderr(mod);
  CHECK(std::abs(ms.mean - 1.0) <= 3 * ms.stderr_ + 2.0 / (256 * 0.5));
}

TEST_CASE("single-resolvent averaged law improves like 1/N") {
  auto dev = [](int N) {
    double s = 0;
    for (int k = 0; k < 16; ++k) {
      const auto S = eigendecompose(sample_wigner(N, SymmetryClass::ComplexHermitian, sample_seed(31, k)).matrix);
      cplx tr = 0;
      for (int a = 0; a < N; ++a) tr += 1.0 / (S.eigenvalues[a] - cplx(0.3, 0.5));
      s += std::abs(tr / double(N) - oracle::semicircle_m({0.3, 0.5}));
    }
    return s / 16;
  };
  const double a = dev(100), b = dev(400);
  CHECK(a / b > 2.0);
  CHECK(a / b < 8.0);
}

TEST_CASE("sample streams are uncorrelated") {
  const int n = 64, samples = 40;
  std::vector<double> x, y;
  for (int s = 0; s < samples; ++s) {
    const MatC a = sample_wigner(n, SymmetryClass::RealSymmetric, sample_seed(5, 2 * s)).matrix;
    const MatC b = sample_wigner(n, SymmetryClass::RealSymmetric, sample_seed(5, 2 * s + 1)).matrix;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        x.push_back(a(i, j).real());
        y.push_back(b(i, j).real());
      }
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += x[k] * y[k];
    sxx += x[k] * x[k];
    syy += y[k] * y[k];
  }
  const double r = sxy / std::sqrt(sxx * syy);
  // n r^2 is chi-square with one degree of freedom under independence; 10.83 is its 0.999 quantile
  CHECK(x.size() * r * r < 10.83);
}

TEST_CASE("Stieltjes positivity and inversion") {
  std::vector<LimitingDensity> dens{LimitingDensity::semicircle(), LimitingDensity::uniform(-1, 2),
                                    LimitingDensity::tabulated({-1, 0, 1}, {0, 1, 0})};
  std::mt19937_64 rng(3);
  for (const auto& rho : dens) {
    for (int k = 0; k < 30; ++k) CHECK(stieltjes_m0(rho, random_z(rng, 1e-3, 5, 1)).imag() > 0);
    const double e = 0.3;
    double prev = 1e300;
    for (double eta : {1e-2, 1e-3, 1e-4}) {
      const double err = std::abs(stieltjes_m0(rho, {e, eta}).imag() / kPi - rho(e));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-3);
  }
}

TEST_CASE("contour quadrature: refinement and radius independence") {
  const double delta = 0.2, eta0 = delta / (4 * std::abs(std::log(delta)));
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, delta, 8);
  const auto spec = build_contours(D1, D2, 5.0, eta0);
  const auto a = deterministic_echo_amplitude(D1, D2, 0.0, eta0, 5.0, spec);
  CHECK(a.quadrature_error_estimate < 1e-6);
  RegimeConfig wide;
  wide.radius = spec.R + 0.5;
  const auto b = deterministic_echo_amplitude(D1, D2, 0.0, eta0, 5.0, build_contours(D1, D2, 5.0, eta0, wide));
  CHECK(std::abs(a.value - b.value) <= std::max(a.quadrature_error_estimate + b.quadrature_error_estimate, 1e-9));
}
