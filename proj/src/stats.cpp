#include "echodyn/stats.hpp"

#include <cmath>

namespace echodyn {

namespace {

template <class T>
T pairwise(const T* x, std::size_t n) {
  if (n == 0) return T(0);
  if (n <= 8) {
    T s = x[0];
    for (std::size_t i = 1; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise(x, h) + pairwise(x + h, n - h);
}

}  // namespace

double pairwise_sum(const double* x, std::size_t n) { return pairwise(x, n); }
cplx pairwise_sum(const cplx* x, std::size_t n) { return pairwise(x, n); }
double pairwise_sum(const std::vector<double>& x) { return pairwise(x.data(), x.size()); }

MeanStderr mean_stderr(const std::vector<double>& x) {
  MeanStderr r;
  const std::size_t n = x.size();
  if (n == 0) return r;
  r.mean = pairwise_sum(x) / n;
  if (n < 2) return r;
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = (x[i] - r.mean) * (x[i] - r.mean);
  r.stderr_ = std::sqrt(pairwise_sum(d) / (n - 1) / n);
  return r;
}

PolyFit weighted_polyfit(const std::vector<double>& x, const std::vector<double>& y,
                         const std::vector<double>& sigma, const std::vector<int>& powers) {
  const int n = static_cast<int>(x.size()), p = static_cast<int>(powers.size());
  if (n < p || static_cast<int>(y.size()) != n)
    throw Error(ErrorKind::InvalidArgument, "not enough points for the fit");
  MatD A(n, p);
  VecD b(n), w(n);
  for (int i = 0; i < n; ++i) {
    const double s = i < static_cast<int>(sigma.size()) && sigma[i] > 0 ? sigma[i] : 1.0;
    w[i] = 1.0 / s;
    for (int j = 0; j < p; ++j) A(i, j) = std::pow(x[i], powers[j]) * w[i];
    b[i] = y[i] * w[i];
  }
  Eigen::ColPivHouseholderQR<MatD> qr(A);
  VecD c = qr.solve(b);
  PolyFit f;
  int maxp = 0;
  for (int q : powers) maxp = std::max(maxp, q);
  f.coef = VecD::Zero(maxp + 1);
  for (int j = 0; j < p; ++j) f.coef[powers[j]] = c[j];
  f.chi2 = (A * c - b).squaredNorm();
  f.dof = n - p;
  MatD cov = (A.transpose() * A).inverse();
  if (f.dof > 0) cov *= f.chi2 / f.dof;
  f.stderr_ = VecD::Zero(maxp + 1);
  for (int j = 0; j < p; ++j) f.stderr_[powers[j]] = std::sqrt(std::max(0.0, cov(j, j)));
  return f;
}

}  // namespace echodyn
