#include "echodyn/mde.hpp"

#include <algorithm>
#include <cmath>

namespace echodyn {

namespace {

VecC fixed_point_target(const AtomSet& a, cplx z, const VecC& v, cplx& m) {
  m = (a.weights.cast<cplx>().array() * v.array()).sum();
  return (a.values.cast<cplx>().array() - z - m).inverse().matrix();
}

double weighted_norm(const VecD& w, const VecC& x) {
  return std::sqrt((w.array() * x.array().abs2()).sum());
}

// Newton on the trace equation g(m) = m - sum_k w_k / (d_k - z - m).
bool newton_trace(const AtomSet& a, cplx z, double sign, cplx& m) {
  const Eigen::ArrayXcd d = a.values.cast<cplx>().array();
  const Eigen::ArrayXd& w = a.weights.array();
  auto g = [&](cplx mm, cplx* dg) {
    Eigen::ArrayXcd inv = (d - z - mm).inverse();
    if (dg) *dg = 1.0 - (w * inv.square()).sum();
    return mm - (w * inv).sum();
  };
  for (int it = 0; it < 200; ++it) {
    cplx dg;
    cplx gm = g(m, &dg);
    if (std::abs(gm) < 1e-16 * (1 + std::abs(m))) return true;
    if (dg == cplx(0.0)) return false;
    cplx step = gm / dg;
    double lam = 1.0;
    cplx trial;
    int k = 0;
    for (; k < 60; ++k) {
      trial = m - lam * step;
      if (trial.imag() * sign > 0 && std::abs(g(trial, nullptr)) < std::abs(gm)) break;
      lam *= 0.5;
    }
    if (k == 60) return std::abs(gm) < 1e-13;
    if (std::abs(trial - m) < 1e-16 * (1 + std::abs(m))) {
      m = trial;
      return true;
    }
    m = trial;
  }
  return false;
}

}  // namespace

double mde_residual(const Deformation& D, cplx z, const VecC& values) {
  const AtomSet& a = D.atoms();
  cplx m;
  VecC target = fixed_point_target(a, z, values, m);
  return weighted_norm(a.weights, values - target);
}

MdeSolution solve_mde(const Deformation& D, SpectralPoint pt, const MdeOptions& opt,
                      const VecC* warm_start) {
  if (std::abs(pt.eta) < 1e-14)
    throw Error(ErrorKind::InvalidArgument, "|Im z| below 1e-14; use boundary_m");
  if (!(opt.tol > 0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  const AtomSet& a = D.atoms();
  const int k = static_cast<int>(a.values.size());
  const cplx z = pt.z();
  const double sign = pt.eta > 0 ? 1.0 : -1.0;

  VecC v = VecC::Constant(k, cplx(0.0, sign));
  if (warm_start && warm_start->size() == k) {
    v = *warm_start;
    for (int j = 0; j < k; ++j)
      if (v[j].imag() * sign <= 0) v[j] = cplx(v[j].real(), sign * 1e-3);
  }

  double alpha = opt.alpha;
  cplx m;
  VecC target = fixed_point_target(a, z, v, m);
  double res = weighted_norm(a.weights, v - target);
  int it = 0;
  bool tried_newton = false;
  bool polished = false;
  double window_res = res;
  int window_start = 0;

  while (res > opt.tol && it < opt.max_iter) {
    ++it;
    VecC next = (1.0 - alpha) * v + alpha * target;
    cplx mn;
    VecC next_target = fixed_point_target(a, z, next, mn);
    double next_res = weighted_norm(a.weights, next - next_target);
    if (next_res > res && alpha > 1e-8) {
      alpha *= 0.5;
      continue;
    }
    v = std::move(next);
    target = std::move(next_target);
    m = mn;
    res = next_res;

    if (!tried_newton && it - window_start >= 20) {
      double rate = std::pow(res / window_res, 1.0 / (it - window_start));
      window_res = res;
      window_start = it;
      if (rate > opt.stall_ratio && res > opt.tol) {
        tried_newton = true;
        cplx mm = m;
        if (newton_trace(a, z, sign, mm)) {
          VecC vn = (a.values.cast<cplx>().array() - z - mm).inverse().matrix();
          cplx m2;
          VecC tn = fixed_point_target(a, z, vn, m2);
          double rn = weighted_norm(a.weights, vn - tn);
          if (rn < res) {
            v = vn;
            target = tn;
            m = m2;
            res = rn;
            polished = true;
          }
        }
      }
    }
  }
  // one last consistent evaluation
  if (res > opt.tol && !tried_newton) {
    cplx mm = m;
    if (newton_trace(a, z, sign, mm)) {
      VecC vn = (a.values.cast<cplx>().array() - z - mm).inverse().matrix();
      cplx m2;
      VecC tn = fixed_point_target(a, z, vn, m2);
      double rn = weighted_norm(a.weights, vn - tn);
      if (rn < res) {
        v = vn;
        m = m2;
        res = rn;
        polished = true;
      }
    }
  }
  if (!(res <= opt.tol))
    throw Error(ErrorKind::NonConvergence,
                "residual " + std::to_string(res) + " after " + std::to_string(it) + " iterations");
  for (int j = 0; j < k; ++j)
    if (!(v[j].imag() * sign > 0))
      throw Error(ErrorKind::ConstraintViolation, "Im M has the wrong sign");

  MdeSolution s;
  s.point = pt;
  s.D = D;
  s.values = std::move(v);
  s.m_trace = (a.weights.cast<cplx>().array() * s.values.array()).sum();
  s.rho = std::abs(s.m_trace.imag()) / kPi;
  s.residual = res;
  s.iterations = it;
  s.newton_polish = polished;
  return s;
}

double scdos(const Deformation& D, double e, double eta) {
  if (!(eta > 0)) throw Error(ErrorKind::InvalidArgument, "scdos needs eta > 0");
  return solve_mde(D, {e, eta}).rho;
}

MdeSolution boundary_m(const Deformation& D, double e, const BoundaryOptions& opt) {
  std::vector<MdeSolution> ladder;
  double eta = opt.eta_start;
  const VecC* warm = nullptr;
  try {
    while (eta >= opt.eta_floor) {
      ladder.push_back(solve_mde(D, {e, eta}, opt.mde, warm));
      warm = &ladder.back().values;
      eta *= 0.5;
    }
  } catch (const Error& err) {
    throw Error(ErrorKind::ContinuationDiverged, std::string("ladder solve failed: ") + err.what());
  }
  if (ladder.size() < 3) throw Error(ErrorKind::ContinuationDiverged, "ladder shorter than three points");
  const VecC& f4 = ladder[ladder.size() - 3].values;
  const VecC& f2 = ladder[ladder.size() - 2].values;
  const VecC& f1 = ladder[ladder.size() - 1].values;
  VecC r1 = 2.0 * f1 - f2;
  VecC r1b = 2.0 * f2 - f4;
  VecC r2 = (4.0 * r1 - r1b) / 3.0;

  const AtomSet& a = D.atoms();
  MdeSolution s;
  s.point = {e, 0.0};
  s.D = D;
  s.values = r2;
  for (int j = 0; j < s.values.size(); ++j)
    if (s.values[j].imag() < 0 && s.values[j].imag() > -1e-12) s.values[j].imag(0.0);
  s.m_trace = (a.weights.cast<cplx>().array() * s.values.array()).sum();
  s.rho = std::abs(s.m_trace.imag()) / kPi;
  s.iterations = 0;
  for (auto& l : ladder) s.iterations += l.iterations;
  s.boundary = true;
  s.extrapolation_residual = (r2 - r1).cwiseAbs().maxCoeff();
  s.residual = mde_residual(D, cplx(e, 0.0), s.values);
  // Polish on the real axis when the extrapolated density is positive.
  if (s.m_trace.imag() > 1e-10) {
    cplx mm = s.m_trace;
    if (newton_trace(a, cplx(e, 0.0), 1.0, mm) && std::abs(mm - s.m_trace) < 1e-3) {
      VecC vn = (a.values.cast<cplx>().array() - e - mm).inverse().matrix();
      double rn = mde_residual(D, cplx(e, 0.0), vn);
      if (rn < s.residual && (vn.imag().array() >= 0).all()) {
        s.values = vn;
        s.m_trace = (a.weights.cast<cplx>().array() * vn.array()).sum();
        s.rho = s.m_trace.imag() / kPi;
        s.residual = rn;
        s.newton_polish = true;
      }
    }
  }
  if (s.newton_polish && s.residual <= 1e-10) return s;
  if (!(s.extrapolation_residual <= opt.max_extrapolation_residual))
    throw Error(ErrorKind::ContinuationDiverged,
                "extrapolation residual " + std::to_string(s.extrapolation_residual));
  return s;
}

bool BulkSet::contains(double e) const {
  for (const auto& iv : intervals)
    if (e >= iv.lo && e <= iv.hi) return true;
  return false;
}

BulkSet kappa_bulk(const Deformation& D, double kappa, double grid) {
  if (!(kappa > 0) || !(grid > 0)) throw Error(ErrorKind::InvalidArgument, "kappa and grid must be positive");
  BulkSet out;
  out.kappa = kappa;
  const double span = D.norm() + 2.0;
  const long n = static_cast<long>(std::floor(2 * span / grid + 0.5));
  bool open = false;
  double lo = 0, last = 0;
  for (long i = 0; i <= n; ++i) {
    double e = -span + i * grid;
    if (std::abs(e) < 0.5 * grid) e = 0.0;
    double rho = 0.0;
    try {
      rho = boundary_m(D, e).rho;
    } catch (const Error&) {
      rho = scdos(D, e, 1e-8);
    }
    bool in = rho >= kappa * (1 - 1e-9);
    if (in && !open) {
      open = true;
      lo = e;
    }
    if (in) last = e;
    if (!in && open) {
      out.intervals.push_back({lo, last});
      open = false;
    }
  }
  if (open) out.intervals.push_back({lo, last});
  if (out.intervals.empty()) throw Error(ErrorKind::EmptyBulk, "no grid point with rho >= kappa");
  return out;
}

AdmissibilityReport check_admissible(const Deformation& D, double L,
                                     const std::vector<int>* declared_breaks) {
  const VecD& d = D.eigenvalues();
  const int n = static_cast<int>(d.size());
  AdmissibilityReport rep;
  auto violation = [&](int s, int j) -> int {
    for (int k = s; k < j; ++k)
      if (std::abs(d[j] - d[k]) > L * std::sqrt(double(j - k) / n) * (1 + 1e-12)) return k;
    return -1;
  };
  const int max_segments = static_cast<int>(std::floor(L + 1e-12));
  if (declared_breaks) {
    std::vector<int> starts{0};
    for (int b : *declared_breaks)
      if (b > 0 && b < n) starts.push_back(b);
    std::sort(starts.begin(), starts.end());
    starts.push_back(n);
    rep.admissible = static_cast<int>(starts.size()) - 1 <= max_segments;
    for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
      rep.segments.push_back({starts[s], starts[s + 1] - 1});
      for (int j = starts[s] + 1; j < starts[s + 1] && rep.violating_j < 0; ++j) {
        int k = violation(starts[s], j);
        if (k >= 0) {
          rep.admissible = false;
          rep.violating_j = j;
          rep.violating_k = k;
        }
      }
    }
  } else {
    int start = 0;
    for (int j = 1; j < n; ++j) {
      int k = violation(start, j);
      if (k >= 0) {
        rep.segments.push_back({start, j - 1});
        if (static_cast<int>(rep.segments.size()) >= max_segments && rep.violating_j < 0) {
          rep.violating_j = j;
          rep.violating_k = k;
        }
        start = j;
      }
    }
    rep.segments.push_back({start, n - 1});
    rep.admissible = static_cast<int>(rep.segments.size()) <= max_segments;
  }
  if (rep.admissible) {
    rep.message = "admissible with " + std::to_string(rep.segments.size()) + " segment(s)";
  } else if (rep.violating_j >= 0) {
    rep.message = "violation between sorted eigenvalues " + std::to_string(rep.violating_k) + " and " +
                  std::to_string(rep.violating_j);
  } else {
    rep.message = "needs more than " + std::to_string(max_segments) + " segments";
  }
  return rep;
}

cplx m_semicircle(cplx z) {
  cplx s = std::sqrt(z * z - 4.0);
  cplx m = 0.5 * (-z + s);
  if (m.imag() * z.imag() <= 0) m = 0.5 * (-z - s);
  return m;
}

}  // namespace echodyn
