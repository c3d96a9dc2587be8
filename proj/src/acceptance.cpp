#include "echodyn/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>

#include "echodyn/contour.hpp"
#include "echodyn/echo.hpp"
#include "echodyn/scenario2.hpp"
#include "echodyn/stats.hpp"

namespace echodyn {

namespace {

std::string f(const char* format, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

// Random traceless Hermitian matrix with operator norm `norm`.
MatC random_traceless(int N, double norm, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  MatC A(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) A(i, j) = cplx(g(rng), g(rng));
  MatC H = (A + A.adjoint()) / 2.0;
  H -= H.trace() / double(N) * MatC::Identity(N, N);
  const VecD ev = eigenvalues_only(H);
  return H * (norm / std::max(std::abs(ev[0]), std::abs(ev[N - 1])));
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::exp(std::uniform_real_distribution<double>(std::log(lo), std::log(hi))(rng));
}

constexpr double kDelta = 0.2;
constexpr int kBatchN = 1024;
constexpr int kBatchSamples = 200;
constexpr std::uint64_t kBatchSeed = 20240611;

double eta0_echo() { return kDelta / (4 * std::abs(std::log(kDelta))); }
double eta0_process() { return kDelta / (1.25 * std::abs(std::log(kDelta))); }

std::vector<double> echo_times() {
  std::vector<double> t = linspace(0.0, 0.3, 16);
  for (double x : linspace(0.5, 20.0, 40)) t.push_back(x);
  for (double x : linspace(200.0, 400.0, 41)) t.push_back(x);
  return t;
}
constexpr double kPlateauFrom = 200.0;

struct Shared {
  int workers = 1;
  std::map<int, ScenarioOneResult> batches;  // keyed by N

  const ScenarioOneResult& batch(int N) {
    auto it = batches.find(N);
    if (it != batches.end()) return it->second;
    const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, kDelta, N);
    ScenarioOneBatch b;
    b.echoes.push_back({0.0, eta0_echo(), echo_times()});
    if (N == kBatchN) {
      const double t = 1.5 / eta0_process();
      b.processes.push_back({0.0, eta0_process(), t, linspace(0.0, 2 * t, 41)});
    }
    SamplingOptions opt;
    opt.workers = workers;
    return batches.emplace(N, run_scenario_one(D1, D2, b, kBatchSamples, kBatchSeed + N, opt)).first->second;
  }
};

CriterionResult c1(Shared&) {
  const Deformation D = Deformation::zero(4);
  double worst = 0;
  for (double e : linspace(-3.0, 3.0, 25))
    for (double eta : {1e-3, 1e-2, 1e-1, 1.0}) {
      const MdeSolution s = solve_mde(D, {e, eta});
      worst = std::max(worst, std::abs(s.m_trace - m_semicircle({e, eta})));
    }
  return {1, "MDE oracle", worst <= 1e-10, f("max |<M> - m_sc| = %.2e over 100 points (tol 1e-10)", worst)};
}

CriterionResult c2(Shared&) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3, 3);
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Deformation D1(random_traceless(8, log_uniform(rng, 0.1, 2.0), rng));
    const Deformation D2(random_traceless(8, log_uniform(rng, 0.1, 2.0), rng));
    const double s1 = rng() % 2 ? 1.0 : -1.0, s2 = rng() % 2 ? 1.0 : -1.0;
    const cplx z1(u(rng), s1 * log_uniform(rng, 1e-2, 2.0)), z2(u(rng), s2 * log_uniform(rng, 1e-2, 2.0));
    const MdeSolution M1 = solve_mde(D1, SpectralPoint::from(z1)), M2 = solve_mde(D2, SpectralPoint::from(z2));
    worst = std::max(worst, m_identity_residual(M1, M2, z1, z2, D1, D2));
  }
  return {2, "Exact identity", worst <= 1e-10, f("max residual = %.2e over 1000 tuples (tol 1e-10)", worst)};
}

CriterionResult c3(Shared&) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  auto draw = [&]() {
    const MatC A = random_traceless(32, log_uniform(rng, 0.2, 1.5), rng);
    const MatC B = random_traceless(32, 1.0, rng);
    const Deformation D1(A), D2(A + log_uniform(rng, 1e-2, 1.0) * B);
    const double e1 = u(rng), e2 = e1 + log_uniform(rng, 1e-3, 1.0) * (rng() % 2 ? 1 : -1);
    const MdeSolution M1 = solve_mde(D1, {e1, log_uniform(rng, 1e-3, 1.0)});
    const MdeSolution M2 = solve_mde(D2, {e2, -log_uniform(rng, 1e-3, 1.0)});
    return stability_eigenvalue(M1, M2).ratio;
  };
  double m1 = 0, m2 = 0;
  for (int k = 0; k < 1000; ++k) m1 = std::max(m1, draw());
  m2 = m1;
  for (int k = 0; k < 1000; ++k) m2 = std::max(m2, draw());
  const bool ok = std::isfinite(m2) && m2 <= 1.2 * m1 && m2 >= 0.8 * m1;
  return {3, "Stability bound", ok, f("max ratio %.4g (1000 tuples) vs %.4g (2000 tuples)", m1, m2)};
}

CriterionResult c4(Shared&) {
  const double v0 = one_body_stability_integral(Deformation::zero(4), 0.0, -2.0, 2.0).value;
  VecD d(64);
  for (int i = 0; i < 64; ++i) d[i] = i < 32 ? 1.0 : -1.0;
  const Deformation D = Deformation::diagonal(d);
  std::vector<double> ladder;
  for (double eta : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
    ladder.push_back(one_body_stability_integral(D, eta, -3.0, 3.0).value);
  const auto [lo, hi] = std::minmax_element(ladder.begin(), ladder.end());
  const double variation = (*hi - *lo) / *lo;
  const bool ok = std::abs(v0 - kPi) <= 1e-4 && variation < 0.10;
  return {4, "Stability integral", ok,
          f("D=0: |value - pi| = %.2e (tol 1e-4); diag(+-1) ladder 1e-2..1e-6 variation %.3f (tol 0.10)",
            std::abs(v0 - kPi), variation)};
}

CriterionResult c5(Shared&) {
  constexpr double C = 2.0;
  std::string detail;
  bool ok = true;
  for (auto [shape, E0] : {std::pair{PairShape::ZeroPlusDirection, 0.0}, std::pair{PairShape::BalancedDiagonal, 1.2}}) {
    double s_over_d = 0, lo = INFINITY, hi = 0;
    for (double delta : {0.05, 0.1, 0.2}) {
      const auto [D1, D2] = sample_deformation_pair(shape, delta, 64);
      const DecayParameters g = gamma_rate(D1, D2, E0);
      const double E2 = g.ladder_E2.front();
      const cplx s = renormalized_shift(D1, D2, E2, delta / 8, delta / 8);
      s_over_d = std::max(s_over_d, std::abs(s) / delta);
      const double q = 0.5 * g.Gamma / (delta * delta);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    ok = ok && s_over_d <= C && hi <= 2 * lo && lo > 0;
    detail += std::string(pair_shape_name(shape)) + f(": max |s|/Delta %.3f (C = 2), Im s0/Delta^2 in [%.4f, %.4f]; ",
                                                      s_over_d, lo, hi);
  }
  return {5, "Shift laws", ok, detail};
}

CriterionResult c6(Shared&) {
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, kDelta, 64);
  const double eta0 = kDelta / (4 * std::abs(std::log(kDelta)));
  bool ok = true;
  std::string detail;
  for (double t : {2.0, 5.0, 10.0, 25.0}) {
    const PhasePrediction ph = phase_prediction(D1, D2, 0.0, eta0, t);
    const DeterministicAmplitude da = deterministic_echo_amplitude(D1, D2, 0.0, eta0, t, build_contours(D1, D2, t, eta0));
    const double dev = std::abs(da.value - ph.value) / ph.im_m1;
    const double env = echo_error_envelope(t, kDelta, eta0);
    ok = ok && dev <= 3 * env;
    detail += f("t=%g: %.3g <= 3E=%.3g; ", t, dev, 3 * env);
  }
  return {6, "Phase law", ok, detail};
}

CriterionResult c7(Shared& sh) {
  const cplx z1(0.3, 1.0), z2(-0.2, -1.0);
  SamplingOptions opt;
  opt.workers = sh.workers;
  double dev[2], err[2];
  int k = 0;
  for (int N : {512, 1024}) {
    const auto [D1, D2] = sample_deformation_pair(PairShape::BalancedDiagonal, kDelta, N);
    const LawCheck lc = two_resolvent_law_check(D1, D2, z1, z2, 50, 7000 + N, opt);
    dev[k] = lc.mean;
    err[k++] = lc.stderr_;
  }
  const double r = dev[0] / dev[1];
  const double sr = r * std::hypot(err[0] / dev[0], err[1] / dev[1]);
  const bool ok = r >= 1.4 - 3 * sr && r <= 2.6 + 3 * sr;
  return {7, "Two-resolvent global law", ok,
          f("mean deviation %.3e (N=512) / %.3e (N=1024) = %.3f +- %.3f, target [1.4, 2.6]", dev[0], dev[1], r, sr)};
}

CriterionResult c8(Shared& sh) {
  const EchoCurve& c = sh.batch(kBatchN).echoes[0];
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, kDelta, kBatchN);
  const double gamma = parabolic_coefficient(D1, D2, 0.0, eta0_echo()).gamma;
  const RateFit fit = fit_short_time_curvature(c, 0.3);
  const bool ok = std::abs(fit.value - gamma) <= 0.10 * gamma + 3 * fit.stderr_;
  return {8, "Scenario-I short time", ok,
          f("fitted curvature %.5f +- %.5f vs gamma %.5f (tol 10%%)", fit.value, fit.stderr_, gamma)};
}

CriterionResult c9(Shared& sh) {
  const EchoCurve& c = sh.batch(kBatchN).echoes[0];
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, kDelta, kBatchN);
  const double Gamma = gamma_rate(D1, D2, 0.0).Gamma;
  const RateFit fit = fit_exponential_rate(c, 2.0, 20.0);
  const bool ok = std::abs(fit.value - Gamma) <= 0.15 * Gamma + 3 * fit.stderr_;
  return {9, "Scenario-I exponential regime", ok,
          f("fitted rate %.5f +- %.5f vs Gamma %.5f (tol 15%%)", fit.value, fit.stderr_, Gamma)};
}

CriterionResult c10(Shared& sh) {
  const EchoCurve& c = sh.batch(kBatchN).processes[0];
  const std::size_t mid = c.times.size() / 2;
  const double a = c.modulus2[mid], b = c.modulus2.back();
  const double r = a / b, sr = r * std::hypot(c.stderr_[mid] / a, c.stderr_.back() / b);
  return {10, "Echo process", r - 3 * sr <= 0.2,
          f("P(t)/P(2t) = %.4f +- %.4f at t = %.2f (bound 0.2)", r, sr, c.times[mid])};
}

CriterionResult c11(Shared& sh) {
  const auto [D1, D2] = sample_deformation_pair(PairShape::ZeroPlusDirection, kDelta, 512);
  const std::vector<double> times = linspace(0.5, 20.0, 40);
  ScenarioOneBatch b;
  b.echoes.push_back({0.0, eta0_echo(), times});
  const std::vector<double> deltas{0.5, 1.0, 1.91585};
  for (double d : deltas) b.scrambled.push_back({d, 0.0, eta0_echo(), times});
  SamplingOptions opt;
  opt.workers = sh.workers;
  const ScenarioOneResult r = run_scenario_one(D1, D2, b, 100, 1100, opt);
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::vector<double> per;
    for (std::size_t s = 0; s < r.echoes[0].per_sample.size(); ++s) {
      const double x = pairwise_sum(r.scrambled[k].per_sample[s]), y = pairwise_sum(r.echoes[0].per_sample[s]);
      per.push_back(x / y);
    }
    const double ratio = pairwise_sum(r.scrambled[k].modulus2) / pairwise_sum(r.echoes[0].modulus2);
    const double err = mean_stderr(per).stderr_;
    const double phi2 = std::pow(bessel_phi(deltas[k]), 2);
    const bool pass = phi2 < 0.01 ? std::abs(ratio) <= 0.05 + 3 * err : std::abs(ratio - phi2) <= 0.10 * phi2 + 3 * err;
    ok = ok && pass;
    detail += f("delta=%g: %.4f +- %.4f vs phi^2 %.4f; ", deltas[k], ratio, err, phi2);
  }
  return {11, "Scrambling factorization", ok, detail};
}

CriterionResult c12(Shared& sh) {
  const int N = 2048;
  const double lambda = 0.1, window = 0.3, t_max = 100.0;
  const LimitingDensity rho = LimitingDensity::semicircle();
  const VecD q = density_quantiles(rho, N);
  const SpectralData S0 = eigendecompose(MatC(q.cast<cplx>().asDiagonal()));
  const LocalizedState psi0 = prepare_localized_state(S0, 0.0, window, 12);
  SamplingOptions opt;
  opt.workers = sh.workers;
  const EchoCurve c = fidelity_echo(S0, lambda, psi0, linspace(0.0, t_max, 51), 8, 1200, opt);
  const RateFit fit = fit_exponential_rate(c, 10.0, t_max);
  std::vector<cplx> zs;
  for (double e : linspace(-window, window, 7))
    for (double eta : {0.1, 0.3, 1.0}) zs.emplace_back(e, eta);
  const double eps0 = verify_h0_assumption(q, rho, zs, 0.1).epsilon0;
  const double pred = 2 * kPi * rho(0.0) * lambda * lambda;
  const double tol = std::max(0.15, error_budget(lambda, t_max, window, eps0) / 1.0);
  const bool ok = std::abs(fit.value - pred) <= tol * pred + 3 * fit.stderr_;
  return {12, "Scenario II", ok,
          f("fitted rate %.5f +- %.5f vs %.5f (tol %.3f)", fit.value, fit.stderr_, pred, tol)};
}

CriterionResult c13(Shared& sh) {
  double lo = INFINITY, hi = 0;
  std::string detail;
  std::vector<double> logn, logp;
  for (int N : {256, 512, 1024}) {
    const RateFit p = plateau(sh.batch(N).echoes[0], kPlateauFrom);
    lo = std::min(lo, N * p.value);
    hi = std::max(hi, N * p.value);
    logn.push_back(std::log(double(N)));
    logp.push_back(std::log(p.value));
    detail += f("N=%g: N*plateau %.4g; ", N, N * p.value);
  }
  const double slope = weighted_polyfit(logn, logp, {}, {0, 1}).coef[1];
  return {13, "Saturation scaling", hi <= 2 * lo, detail + f("plateau ~ N^%.2f (factor-2 band on N*plateau)", slope)};
}

CriterionResult c14(Shared&) {
  double radius = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const VecD ev = eigenvalues_only(sample_wigner(2000, SymmetryClass::ComplexHermitian, sample_seed(14, s)).matrix);
    radius = std::max({radius, std::abs(ev[0]), std::abs(ev[ev.size() - 1])});
  }
  const int N = 1000;
  std::mt19937_64 rng(1414);
  std::normal_distribution<double> g;
  VecC psi(N), phi = VecC::Zero(N);
  for (int i = 0; i < N; ++i) psi[i] = cplx(g(rng), g(rng));
  psi.normalize();
  phi[0] = 1.0;
  double iso = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const MatC W = sample_wigner(N, SymmetryClass::ComplexHermitian, sample_seed(1415, s)).matrix;
    iso = std::max(iso, std::abs(psi.dot(W * phi)) * std::sqrt(double(N)));
  }
  const double cap = std::log(double(N));
  return {14, "Wigner checks", radius <= 2.1 && iso <= cap,
          f("spectral radius %.4f (<= 2.1, N=2000, 20 seeds); max sqrt(N)|<psi,W phi>| %.3f (<= log N = %.3f, 100 seeds)",
            radius, iso, cap)};
}

}  // namespace

std::string format_criterion(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-30s %7.1fs  ", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
  return head + r.detail;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  const std::vector<std::function<CriterionResult(Shared&)>> all{c1, c2, c3, c4, c5, c6, c7,
                                                                 c8, c9, c10, c11, c12, c13, c14};
  Shared sh;
  sh.workers = opt.workers;
  std::vector<CriterionResult> out;
  for (int id = 1; id <= 14; ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    try {
      r = all[id - 1](sh);
    } catch (const std::exception& e) {
      r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
    }
    r.id = id;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.log) *opt.log << format_criterion(r) << std::endl;
    out.push_back(r);
  }
  return out;
}

}  // namespace echodyn
