#include "echodyn/scenario2.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace echodyn {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 61>;

double integrate(const std::function<double(double)>& f, double a, double b, double* err) {
  return GK::integrate(f, a, b, 25, 1e-13, err);
}

double linear_interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  if (x < xs.front() || x > xs.back()) return 0.0;
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.end()) return ys.back();
  std::size_t j = it - xs.begin();
  if (j == 0) return ys.front();
  const double u = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + u * (ys[j] - ys[j - 1]);
}

}  // namespace

double LimitingDensity::total_mass() const {
  if (!xs.empty()) {
    double s = 0;
    for (std::size_t j = 1; j < xs.size(); ++j) s += 0.5 * (ys[j] + ys[j - 1]) * (xs[j] - xs[j - 1]);
    return s;
  }
  double s = 0, err = 0;
  for (const auto& iv : support) s += integrate(evaluate, iv.lo, iv.hi, &err);
  return s;
}

LimitingDensity LimitingDensity::semicircle() {
  LimitingDensity r;
  r.name = "semicircle";
  r.evaluate = [](double x) { return x * x >= 4 ? 0.0 : std::sqrt(4 - x * x) / (2 * kPi); };
  r.closed_form_m0 = [](cplx z) { return m_semicircle(z); };
  r.cdf = [](double x) {
    if (x <= -2) return 0.0;
    if (x >= 2) return 1.0;
    return 0.5 + x * std::sqrt(4 - x * x) / (4 * kPi) + std::asin(x / 2) / kPi;
  };
  r.support = {{-2.0, 2.0}};
  return r;
}

LimitingDensity LimitingDensity::uniform(double a, double b) {
  if (!(b > a)) throw Error(ErrorKind::InvalidArgument, "uniform density needs a < b");
  LimitingDensity r = tabulated({a, b}, {1.0 / (b - a), 1.0 / (b - a)});
  r.name = "uniform";
  r.cdf = [a, b](double x) { return std::clamp((x - a) / (b - a), 0.0, 1.0); };
  return r;
}

LimitingDensity LimitingDensity::tabulated(std::vector<double> xs, std::vector<double> ys, bool normalize) {
  if (xs.size() < 2 || xs.size() != ys.size())
    throw Error(ErrorKind::InvalidArgument, "density table needs >= 2 matching rows");
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (j > 0 && !(xs[j] > xs[j - 1])) throw Error(ErrorKind::InvalidArgument, "density abscissae must increase");
    if (!(ys[j] >= 0)) throw Error(ErrorKind::InvalidArgument, "density values must be >= 0");
  }
  LimitingDensity r;
  r.name = "tabulated";
  r.xs = std::move(xs);
  r.ys = std::move(ys);
  const double mass = r.total_mass();
  if (normalize) {
    for (double& y : r.ys) y /= mass;
  } else if (std::abs(mass - 1) > 1e-8) {
    throw Error(ErrorKind::InvalidArgument, "density table integrates to " + std::to_string(mass));
  }
  const auto X = r.xs, Y = r.ys;
  r.evaluate = [X, Y](double x) { return linear_interp(X, Y, x); };
  r.support = {{r.xs.front(), r.xs.back()}};
  return r;
}

LimitingDensity load_density_table(const std::string& path, bool normalize) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double x, y;
    if (!(ls >> x)) continue;
    if (!(ls >> y)) throw Error(ErrorKind::Io, "malformed density row: " + line);
    xs.push_back(x);
    ys.push_back(y);
  }
  LimitingDensity r = LimitingDensity::tabulated(std::move(xs), std::move(ys), normalize);
  r.name = path;
  return r;
}

void save_density_table(const LimitingDensity& rho, const std::string& path, int points) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.precision(17);
  out << "# x rho\n";
  if (!rho.xs.empty()) {
    for (std::size_t j = 0; j < rho.xs.size(); ++j) out << rho.xs[j] << ' ' << rho.ys[j] << '\n';
    return;
  }
  const double lo = rho.support.front().lo, hi = rho.support.back().hi;
  for (int j = 0; j < points; ++j) {
    const double x = lo + (hi - lo) * j / (points - 1);
    out << x << ' ' << rho(x) << '\n';
  }
}

cplx stieltjes_m0(const LimitingDensity& rho, cplx z) {
  if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "stieltjes_m0 needs Im z != 0");
  if (rho.closed_form_m0) return rho.closed_form_m0(z);
  if (!rho.xs.empty()) {
    // exact for a piecewise-linear density: int (a + b x)/(x - z) dx on each cell
    cplx s = 0;
    for (std::size_t j = 1; j < rho.xs.size(); ++j) {
      const double x0 = rho.xs[j - 1], x1 = rho.xs[j];
      const double b = (rho.ys[j] - rho.ys[j - 1]) / (x1 - x0);
      const double a = rho.ys[j - 1] - b * x0;
      s += b * (x1 - x0) + (a + b * z) * (std::log(cplx(x1) - z) - std::log(cplx(x0) - z));
    }
    return s;
  }
  double re = 0, im = 0, err_re = 0, err_im = 0;
  for (const auto& iv : rho.support) {
    double e1 = 0, e2 = 0;
    re += integrate([&](double x) { return (rho(x) / (cplx(x) - z)).real(); }, iv.lo, iv.hi, &e1);
    im += integrate([&](double x) { return (rho(x) / (cplx(x) - z)).imag(); }, iv.lo, iv.hi, &e2);
    err_re += e1;
    err_im += e2;
  }
  const cplx m(re, im);
  if (std::hypot(err_re, err_im) > 1e-8 * (1 + std::abs(m)))
    throw Error(ErrorKind::QuadratureUnderResolved, "Stieltjes quadrature error estimate too large");
  return m;
}

H0Report verify_h0_assumption(const VecD& mu, const LimitingDensity& rho, const std::vector<cplx>& z_grid,
                              double eta_floor) {
  H0Report r;
  for (cplx z : z_grid) {
    if (std::abs(z.imag()) < eta_floor)
      throw Error(ErrorKind::InvalidArgument, "grid point below the eta floor");
    const cplx emp = (mu.cast<cplx>().array() - z).inverse().mean();
    const double d = std::abs(emp - stieltjes_m0(rho, z));
    r.deviations.push_back(d);
    if (d >= r.epsilon0) {
      r.epsilon0 = d;
      r.worst_z = z;
    }
  }
  return r;
}

std::vector<Interval> admissible_energies(const LimitingDensity& rho, double kappa, double c, double grid) {
  if (!(kappa > 0 && c > 0 && grid > 0)) throw Error(ErrorKind::InvalidArgument, "kappa, c, grid must be positive");
  const double lo = rho.support.front().lo, hi = rho.support.back().hi;
  const int n = static_cast<int>(std::ceil((hi - lo) / grid)) + 1;
  const double h = (hi - lo) / (n - 1);
  auto x_of = [&](int i) { return lo + h * i; };
  auto f = [&](double x) { return rho(x); };
  std::vector<double> val(n), d1(n), d2(n);
  std::vector<char> resolved(n, 1);
  for (int i = 0; i < n; ++i) {
    const double x = x_of(i);
    val[i] = f(x);
    double first[3], second[3];
    for (int s = 0; s < 3; ++s) {
      const double hs = h * (1 << s);
      first[s] = (f(x + hs) - f(x - hs)) / (2 * hs);
      second[s] = (f(x + hs) - 2 * val[i] + f(x - hs)) / (hs * hs);
    }
    d1[i] = first[0];
    d2[i] = second[0];
    // the three scales must agree for the derivative estimates to count
    for (int s = 1; s < 3; ++s) {
      if (std::abs(first[s] - first[0]) > 0.1 * std::max(1.0, std::abs(first[0]))) resolved[i] = 0;
      if (std::abs(second[s] - second[0]) > 0.25 * std::max(1.0, std::abs(second[0]))) resolved[i] = 0;
    }
  }
  const int w = static_cast<int>(std::round(kappa / h));
  std::vector<Interval> out;
  bool open = false;
  for (int i = 0; i < n; ++i) {
    bool ok = i - w >= 0 && i + w < n && val[i] > 0;
    double inf = std::numeric_limits<double>::infinity(), s0 = 0, s1 = 0, s2 = 0;
    for (int j = i - w; ok && j <= i + w; ++j) {
      if (!resolved[j]) ok = false;
      inf = std::min(inf, val[j]);
      s0 = std::max(s0, std::abs(val[j]));
      s1 = std::max(s1, std::abs(d1[j]));
      s2 = std::max(s2, std::abs(d2[j]));
    }
    ok = ok && inf > c && s0 + s1 + s2 <= 1.0 / c;
    if (ok && !open) {
      out.push_back({x_of(i), x_of(i)});
      open = true;
    } else if (ok) {
      out.back().hi = x_of(i);
    } else {
      open = false;
    }
  }
  if (out.empty()) throw Error(ErrorKind::EmptyAdmissibleSet, "no admissible energies for the given (kappa, c)");
  return out;
}

double predicted_decay(const LimitingDensity& rho, double E0, double lambda, double t) {
  return std::exp(-2 * kPi * rho(E0) * lambda * lambda * t);
}

double error_budget(double lambda, double t, double delta, double epsilon0) {
  if (lambda == 0) return 0.0;
  const double l2t = lambda * lambda * t;
  return l2t * delta + lambda * (1 + l2t) + (lambda / delta) * (1 + lambda / delta) + l2t * epsilon0;
}

VecD density_quantiles(const LimitingDensity& rho, int N) {
  if (N < 1) throw Error(ErrorKind::InvalidArgument, "N must be positive");
  const double lo = rho.support.front().lo, hi = rho.support.back().hi;
  std::function<double(double)> F = rho.cdf;
  if (!F) {
    F = [&](double x) {
      double s = 0, err = 0;
      for (const auto& iv : rho.support) {
        const double b = std::min(x, iv.hi);
        if (b > iv.lo) s += integrate(rho.evaluate, iv.lo, b, &err);
      }
      return s;
    };
  }
  VecD q(N);
  for (int j = 0; j < N; ++j) {
    const double target = (j + 0.5) / N;
    std::uintmax_t it = 200;
    auto g = [&](double x) { return F(x) - target; };
    auto r = boost::math::tools::toms748_solve(g, lo, hi, g(lo), g(hi),
                                               boost::math::tools::eps_tolerance<double>(52), it);
    q[j] = 0.5 * (r.first + r.second);
  }
  return q;
}

}  // namespace echodyn
