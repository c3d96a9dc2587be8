#include "echodyn/echo.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "echodyn/stats.hpp"
#include "echodyn/two_resolvent.hpp"

namespace echodyn {

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string num(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Sample amplitudes [sample][time] -> curve.
EchoCurve reduce(const std::vector<double>& times, const std::vector<std::vector<cplx>>& amps) {
  EchoCurve c;
  c.times = times;
  c.n_samples = static_cast<int>(amps.size());
  const std::size_t T = times.size(), S = amps.size();
  c.amplitude.resize(T);
  c.modulus2.resize(T);
  c.stderr_.resize(T);
  c.per_sample.assign(S, std::vector<double>(T));
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t k = 0; k < T; ++k) c.per_sample[s][k] = std::norm(amps[s][k]);
  std::vector<cplx> col(S);
  std::vector<double> m(S);
  for (std::size_t k = 0; k < T; ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      col[s] = amps[s][k];
      m[s] = c.per_sample[s][k];
    }
    c.amplitude[k] = S ? pairwise_sum(col.data(), S) / double(S) : cplx(0.0);
    MeanStderr ms = mean_stderr(m);
    c.modulus2[k] = ms.mean;
    c.stderr_[k] = ms.stderr_;
  }
  return c;
}

// (1/N) sum_ab exp(i sx_k mu1_a) p_a Q_ab exp(-i sy_k mu2_b) for each k.
std::vector<cplx> bilinear_real(const VecD& mu1, const VecD& p, const MatD& Q, const VecD& mu2,
                                const std::vector<double>& sx, const std::vector<double>& sy) {
  const int N = static_cast<int>(mu1.size()), T = static_cast<int>(sx.size());
  MatD Yr(N, T), Yi(N, T);
  for (int k = 0; k < T; ++k)
    for (int b = 0; b < N; ++b) {
      const double ph = -sy[k] * mu2[b];
      Yr(b, k) = std::cos(ph);
      Yi(b, k) = std::sin(ph);
    }
  const MatD Zr = Q * Yr, Zi = Q * Yi;
  std::vector<cplx> out(T);
  std::vector<cplx> terms(N);
  for (int k = 0; k < T; ++k) {
    for (int a = 0; a < N; ++a)
      terms[a] = std::exp(I1 * (sx[k] * mu1[a])) * p[a] * cplx(Zr(a, k), Zi(a, k));
    out[k] = pairwise_sum(terms.data(), N) / double(N);
  }
  return out;
}

std::vector<cplx> bilinear_complex(const VecD& mu1, const VecD& p, const MatC& Q, const VecD& mu2,
                                   const std::vector<double>& sx, const std::vector<double>& sy) {
  const int N = static_cast<int>(mu1.size()), T = static_cast<int>(sx.size());
  MatC Y(N, T);
  for (int k = 0; k < T; ++k)
    for (int b = 0; b < N; ++b) Y(b, k) = std::exp(-I1 * (sy[k] * mu2[b]));
  const MatC Z = Q * Y;
  std::vector<cplx> out(T);
  std::vector<cplx> terms(N);
  for (int k = 0; k < T; ++k) {
    for (int a = 0; a < N; ++a) terms[a] = std::exp(I1 * (sx[k] * mu1[a])) * p[a] * Z(a, k);
    out[k] = pairwise_sum(terms.data(), N) / double(N);
  }
  return out;
}

VecD cauchy_weights(const VecD& mu, double E0, double eta0) {
  return (eta0 / ((mu.array() - E0).square() + eta0 * eta0)).matrix();
}

double im_m1(const Deformation& D1, double E0, double eta0) {
  if (!(eta0 > 0)) throw Error(ErrorKind::InvalidArgument, "eta0 must be positive");
  return solve_mde(D1, {E0, eta0}).m_trace.imag();
}

std::uint64_t scramble_seed(std::uint64_t seed, int i) {
  return sample_seed(sample_seed(seed, static_cast<std::uint64_t>(i)), 0x5c5c5c5cULL);
}

std::map<std::string, std::string> base_params(int N, int n_samples, std::uint64_t seed,
                                               const SamplingOptions& opt) {
  return {{"N", std::to_string(N)},
          {"n_samples", std::to_string(n_samples)},
          {"seed", std::to_string(seed)},
          {"symmetry_class", symmetry_class_name(opt.symmetry_class)},
          {"entry_law", entry_law_name(opt.entry_law)}};
}

}  // namespace

ScenarioOneResult run_scenario_one(const Deformation& D1, const Deformation& D2,
                                   const ScenarioOneBatch& batch, int n_samples, std::uint64_t seed,
                                   const SamplingOptions& opt) {
  const int N = D1.size();
  if (D2.size() != N) throw Error(ErrorKind::InvalidArgument, "D1 and D2 sizes differ");
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  const bool same = D1.id() == D2.id();

  std::vector<double> norm_e, norm_p, norm_s;
  for (auto& r : batch.echoes) norm_e.push_back(im_m1(D1, r.E0, r.eta0));
  for (auto& r : batch.processes) {
    if (!(r.t > 0)) throw Error(ErrorKind::InvalidArgument, "process time must be positive");
    norm_p.push_back(im_m1(D1, r.E0, r.eta0));
  }
  for (auto& r : batch.scrambled) norm_s.push_back(im_m1(D1, r.E0, r.eta0));

  using Amps = std::vector<std::vector<cplx>>;
  std::vector<Amps> ea(batch.echoes.size(), Amps(n_samples));
  std::vector<Amps> pa(batch.processes.size(), Amps(n_samples));
  std::vector<Amps> sa(batch.scrambled.size(), Amps(n_samples));

  parallel_for(n_samples, opt.workers, [&](int i) {
    const WignerSample w = sample_wigner(N, opt.symmetry_class, sample_seed(seed, i), opt.entry_law);
    const SpectralData S1 = eigendecompose(D1.matrix() + w.matrix);
    const SpectralData S2 = same ? S1 : eigendecompose(D2.matrix() + w.matrix);
    const MatC O = S1.eigenvectors.adjoint() * S2.eigenvectors;
    const MatD Q = O.cwiseAbs2();

    for (std::size_t r = 0; r < batch.echoes.size(); ++r) {
      const auto& q = batch.echoes[r];
      VecD p = cauchy_weights(S1.eigenvalues, q.E0, q.eta0) / norm_e[r];
      ea[r][i] = bilinear_real(S1.eigenvalues, p, Q, S2.eigenvalues, q.times, q.times);
    }
    for (std::size_t r = 0; r < batch.processes.size(); ++r) {
      const auto& q = batch.processes[r];
      VecD p = cauchy_weights(S1.eigenvalues, q.E0, q.eta0) / norm_p[r];
      std::vector<double> late_x, late_y;
      std::vector<cplx> out(q.s_grid.size());
      for (std::size_t k = 0; k < q.s_grid.size(); ++k) {
        const double s = q.s_grid[k];
        if (s <= q.t) {
          std::vector<cplx> terms(N);
          for (int a = 0; a < N; ++a) terms[a] = std::exp(I1 * (s * S1.eigenvalues[a])) * p[a];
          out[k] = pairwise_sum(terms.data(), N) / double(N);
        } else {
          late_x.push_back(q.t);
          late_y.push_back(s - q.t);
        }
      }
      if (!late_x.empty()) {
        auto late = bilinear_real(S1.eigenvalues, p, Q, S2.eigenvalues, late_x, late_y);
        std::size_t j = 0;
        for (std::size_t k = 0; k < q.s_grid.size(); ++k)
          if (q.s_grid[k] > q.t) out[k] = late[j++];
      }
      pa[r][i] = std::move(out);
    }
    if (!batch.scrambled.empty()) {
      const WignerSample wt = sample_wigner(N, opt.symmetry_class, scramble_seed(seed, i), opt.entry_law);
      const SpectralData Sw = eigendecompose(wt.matrix);
      const MatC left = S2.eigenvectors.adjoint() * Sw.eigenvectors;
      const MatC right = Sw.eigenvectors.adjoint() * S1.eigenvectors;
      for (std::size_t r = 0; r < batch.scrambled.size(); ++r) {
        const auto& q = batch.scrambled[r];
        VecC ph = (Sw.eigenvalues.cast<cplx>() * (-I1 * q.delta)).array().exp().matrix();
        const MatC K = left * ph.asDiagonal() * right;  // U2* exp(-i delta W~) U1
        const MatC Qsc = O.cwiseProduct(K.transpose());
        VecD p = cauchy_weights(S1.eigenvalues, q.E0, q.eta0) / norm_s[r];
        sa[r][i] = bilinear_complex(S1.eigenvalues, p, Qsc, S2.eigenvalues, q.times, q.times);
      }
    }
  });

  ScenarioOneResult res;
  const double d2 = delta_squared(D1, D2);
  auto tag = [&](EchoCurve& c, const char* kind, double E0, double eta0) {
    c.params = base_params(N, n_samples, seed, opt);
    c.params["observable"] = kind;
    c.params["E0"] = num(E0);
    c.params["eta0"] = num(eta0);
    c.params["delta_squared"] = num(d2);
  };
  for (std::size_t r = 0; r < batch.echoes.size(); ++r) {
    res.echoes.push_back(reduce(batch.echoes[r].times, ea[r]));
    tag(res.echoes.back(), "averaged_echo", batch.echoes[r].E0, batch.echoes[r].eta0);
  }
  for (std::size_t r = 0; r < batch.processes.size(); ++r) {
    res.processes.push_back(reduce(batch.processes[r].s_grid, pa[r]));
    tag(res.processes.back(), "echo_process", batch.processes[r].E0, batch.processes[r].eta0);
    res.processes.back().params["t"] = num(batch.processes[r].t);
  }
  for (std::size_t r = 0; r < batch.scrambled.size(); ++r) {
    res.scrambled.push_back(reduce(batch.scrambled[r].times, sa[r]));
    tag(res.scrambled.back(), "scrambled_averaged_echo", batch.scrambled[r].E0, batch.scrambled[r].eta0);
    res.scrambled.back().params["delta"] = num(batch.scrambled[r].delta);
  }
  return res;
}

EchoCurve averaged_echo(const Deformation& D1, const Deformation& D2, double E0, double eta0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt) {
  ScenarioOneBatch b;
  b.echoes.push_back({E0, eta0, times});
  return run_scenario_one(D1, D2, b, n_samples, seed, opt).echoes.front();
}

EchoCurve echo_process(const Deformation& D1, const Deformation& D2, double E0, double eta0, double t,
                       const std::vector<double>& s_grid, int n_samples, std::uint64_t seed,
                       const SamplingOptions& opt) {
  for (double s : s_grid)
    if (s < 0 || s > 2 * t * (1 + 1e-12)) throw Error(ErrorKind::InvalidArgument, "s_grid must lie in [0, 2t]");
  ScenarioOneBatch b;
  b.processes.push_back({E0, eta0, t, s_grid});
  return run_scenario_one(D1, D2, b, n_samples, seed, opt).processes.front();
}

EchoCurve scrambled_averaged_echo(const Deformation& D1, const Deformation& D2, double delta,
                                  double E0, double eta0, const std::vector<double>& times,
                                  int n_samples, std::uint64_t seed, const SamplingOptions& opt) {
  ScenarioOneBatch b;
  b.scrambled.push_back({delta, E0, eta0, times});
  return run_scenario_one(D1, D2, b, n_samples, seed, opt).scrambled.front();
}

double bessel_phi(double delta) {
  const double d = std::abs(delta);
  if (d < 1e-6) return 1.0 - d * d / 2;
  return std::cyl_bessel_j(1.0, 2 * d) / d;
}

LocalizedState prepare_localized_state(const SpectralData& S0, double E0, double delta,
                                       std::uint64_t seed, CoefficientLaw law) {
  if (!(delta > 0)) throw Error(ErrorKind::InvalidArgument, "window half-width must be positive");
  LocalizedState st;
  st.window = {E0 - delta, E0 + delta};
  const VecD& mu = S0.eigenvalues;
  for (int j = 0; j < mu.size(); ++j)
    if (mu[j] >= st.window.lo && mu[j] <= st.window.hi) st.indices.push_back(j);
  const int w = static_cast<int>(st.indices.size());
  if (w < 2) throw Error(ErrorKind::EmptyWindow, "fewer than two eigenvalues in the window");
  VecD x(w);
  for (int a = 0; a < w; ++a) x[a] = (mu[st.indices[a]] - E0) / delta;
  if (!(x.minCoeff() < 0 && x.maxCoeff() > 0))
    throw Error(ErrorKind::EnergyUnreachable, "E0 not interior to the convex hull of the window eigenvalues");

  VecC c(w);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  for (int a = 0; a < w; ++a)
    c[a] = law == CoefficientLaw::Gaussian ? cplx(gauss(rng), gauss(rng)) / std::sqrt(2.0) : cplx(1.0);
  const VecD q = c.cwiseAbs2();

  // exponential tilt |c_a|^2 -> |c_a|^2 exp(theta x_a) moving the energy onto E0
  auto energy = [&](double theta) {
    const double shift = theta > 0 ? theta * x.maxCoeff() : theta * x.minCoeff();
    VecD e = (q.array() * (theta * x.array() - shift).exp()).matrix();
    return e.dot(x) / e.sum();
  };
  double theta = 0;
  if (std::abs(energy(0)) > 1e-14) {
    double lo = -1, hi = 1;
    while (energy(lo) > 0) lo *= 2;
    while (energy(hi) < 0) hi *= 2;
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(energy, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
    theta = 0.5 * (r.first + r.second);
  }
  const double shift = theta > 0 ? theta * x.maxCoeff() : theta * x.minCoeff();
  for (int a = 0; a < w; ++a) c[a] *= std::exp(0.5 * (theta * x[a] - shift));
  c /= c.norm();
  st.coefficients = c;
  st.vector = VecC::Zero(mu.size());
  for (int a = 0; a < w; ++a) st.vector += c[a] * S0.eigenvectors.col(st.indices[a]);
  st.vector /= st.vector.norm();
  st.energy = 0;
  for (int a = 0; a < w; ++a) st.energy += std::norm(c[a]) * mu[st.indices[a]];
  return st;
}

namespace {

EchoCurve fidelity_impl(const SpectralData& S0, double lambda, const double* delta,
                        const LocalizedState& psi0, const std::vector<double>& times, int n_samples,
                        std::uint64_t seed, const SamplingOptions& opt) {
  const int N = static_cast<int>(S0.eigenvalues.size());
  const int w = static_cast<int>(psi0.indices.size());
  if (n_samples < 1) throw Error(ErrorKind::InvalidArgument, "n_samples must be >= 1");
  MatC U0w(N, w);
  VecD mu0w(w);
  for (int a = 0; a < w; ++a) {
    U0w.col(a) = S0.eigenvectors.col(psi0.indices[a]);
    mu0w[a] = S0.eigenvalues[psi0.indices[a]];
  }
  const MatC H0 = S0.eigenvectors * S0.eigenvalues.cast<cplx>().asDiagonal() * S0.eigenvectors.adjoint();
  const int T = static_cast<int>(times.size());
  MatC R(w, T);  // c_a exp(-i t mu0_a)
  for (int k = 0; k < T; ++k)
    for (int a = 0; a < w; ++a) R(a, k) = psi0.coefficients[a] * std::exp(-I1 * (times[k] * mu0w[a]));

  std::vector<std::vector<cplx>> amps(n_samples);
  parallel_for(n_samples, opt.workers, [&](int i) {
    std::vector<cplx> out(T, cplx(1.0));
    if (lambda == 0.0 && !delta) {
      amps[i] = out;
      return;
    }
    const WignerSample wm = sample_wigner(N, opt.symmetry_class, sample_seed(seed, i), opt.entry_law);
    const SpectralData Sl = eigendecompose(H0 + lambda * wm.matrix);
    MatC X = U0w;
    if (delta) {
      const WignerSample wt = sample_wigner(N, opt.symmetry_class, scramble_seed(seed, i), opt.entry_law);
      const SpectralData Sw = eigendecompose(wt.matrix);
      VecC ph = (Sw.eigenvalues.cast<cplx>() * (-I1 * *delta)).array().exp().matrix();
      X = Sw.eigenvectors * (ph.asDiagonal() * (Sw.eigenvectors.adjoint() * U0w));
    }
    const VecC alpha = Sl.eigenvectors.adjoint() * psi0.vector;
    const MatC B = Sl.eigenvectors.adjoint() * X;
    const MatC Y = B * R;
    std::vector<cplx> terms(N);
    for (int k = 0; k < T; ++k) {
      for (int j = 0; j < N; ++j) terms[j] = std::conj(alpha[j]) * std::exp(I1 * (times[k] * Sl.eigenvalues[j])) * Y(j, k);
      out[k] = pairwise_sum(terms.data(), N);
    }
    amps[i] = std::move(out);
  });
  EchoCurve c = reduce(times, amps);
  c.params = base_params(N, n_samples, seed, opt);
  c.params["observable"] = delta ? "scrambled_fidelity_echo" : "fidelity_echo";
  c.params["lambda"] = num(lambda);
  c.params["E0"] = num(psi0.energy);
  c.params["window_lo"] = num(psi0.window.lo);
  c.params["window_hi"] = num(psi0.window.hi);
  if (delta) c.params["delta"] = num(*delta);
  return c;
}

}  // namespace

EchoCurve fidelity_echo(const SpectralData& S0, double lambda, const LocalizedState& psi0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt) {
  return fidelity_impl(S0, lambda, nullptr, psi0, times, n_samples, seed, opt);
}

EchoCurve fidelity_echo(const MatC& H0, double lambda, const LocalizedState& psi0,
                        const std::vector<double>& times, int n_samples, std::uint64_t seed,
                        const SamplingOptions& opt) {
  return fidelity_impl(eigendecompose(H0), lambda, nullptr, psi0, times, n_samples, seed, opt);
}

EchoCurve scrambled_fidelity_echo(const SpectralData& S0, double lambda, double delta,
                                  const LocalizedState& psi0, const std::vector<double>& times,
                                  int n_samples, std::uint64_t seed, const SamplingOptions& opt) {
  return fidelity_impl(S0, lambda, &delta, psi0, times, n_samples, seed, opt);
}

LawCheck two_resolvent_law_check(const Deformation& D1, const Deformation& D2, cplx z1, cplx z2,
                                 int n_samples, std::uint64_t seed, const SamplingOptions& opt) {
  const int N = D1.size();
  auto dist = [](cplx z, double edge) {
    const double dx = std::max(0.0, std::abs(z.real()) - edge);
    return std::hypot(dx, z.imag());
  };
  if (!(dist(z1, D1.norm() + 2) > 0 && dist(z2, D2.norm() + 2) > 0))
    throw Error(ErrorKind::InvalidArgument, "z_j must keep a positive distance from [-(L+2), L+2]");
  LawCheck lc;
  lc.deterministic = m12(solve_mde(D1, SpectralPoint::from(z1)), solve_mde(D2, SpectralPoint::from(z2))).trace;
  lc.deviations.resize(n_samples);
  parallel_for(n_samples, opt.workers, [&](int i) {
    const WignerSample w = sample_wigner(N, opt.symmetry_class, sample_seed(seed, i), opt.entry_law);
    const MatC id = MatC::Identity(N, N);
    const MatC G1 = (D1.matrix() + w.matrix - z1 * id).partialPivLu().inverse();
    const MatC G2 = (D2.matrix() + w.matrix - z2 * id).partialPivLu().inverse();
    const cplx tr = G1.cwiseProduct(G2.transpose()).sum() / double(N);
    lc.deviations[i] = std::abs(tr - lc.deterministic);
  });
  MeanStderr ms = mean_stderr(lc.deviations);
  lc.mean = ms.mean;
  lc.stderr_ = ms.stderr_;
  lc.max = *std::max_element(lc.deviations.begin(), lc.deviations.end());
  return lc;
}

RateFit fit_short_time_curvature(const EchoCurve& c, double t_max, bool quartic) {
  std::vector<double> x, y, s;
  for (std::size_t k = 0; k < c.times.size(); ++k)
    if (c.times[k] >= 0 && c.times[k] <= t_max) {
      x.push_back(c.times[k]);
      y.push_back(c.modulus2[k]);
      s.push_back(std::max(c.stderr_[k], 1e-12));
    }
  std::vector<int> powers = quartic ? std::vector<int>{0, 2, 4} : std::vector<int>{0, 2};
  PolyFit f = weighted_polyfit(x, y, s, powers);
  RateFit r;
  r.intercept = f.coef[0];
  r.value = -f.coef[2] / f.coef[0];
  r.stderr_ = std::abs(r.value) * std::hypot(f.stderr_[2] / f.coef[2], f.stderr_[0] / f.coef[0]);
  r.points = static_cast<int>(x.size());
  return r;
}

RateFit fit_exponential_rate(const EchoCurve& c, double t_lo, double t_hi) {
  std::vector<double> x, y, s;
  for (std::size_t k = 0; k < c.times.size(); ++k)
    if (c.times[k] >= t_lo && c.times[k] <= t_hi && c.modulus2[k] > 0) {
      x.push_back(c.times[k]);
      y.push_back(std::log(c.modulus2[k]));
      s.push_back(std::max(c.stderr_[k] / c.modulus2[k], 1e-12));
    }
  PolyFit f = weighted_polyfit(x, y, s, {0, 1});
  RateFit r;
  r.value = -f.coef[1];
  r.stderr_ = f.stderr_[1];
  r.intercept = std::exp(f.coef[0]);
  r.points = static_cast<int>(x.size());
  return r;
}

RateFit plateau(const EchoCurve& c, double t_from) {
  std::vector<double> per;
  for (const auto& row : c.per_sample) {
    std::vector<double> v;
    for (std::size_t k = 0; k < c.times.size(); ++k)
      if (c.times[k] >= t_from) v.push_back(row[k]);
    if (v.empty()) throw Error(ErrorKind::InvalidArgument, "no times in the plateau window");
    per.push_back(pairwise_sum(v) / v.size());
  }
  MeanStderr ms = mean_stderr(per);
  RateFit r;
  r.value = ms.mean;
  r.stderr_ = ms.stderr_;
  r.points = static_cast<int>(per.size());
  return r;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace echodyn
