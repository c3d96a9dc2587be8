#include "echodyn/ensembles.hpp"

#include <cmath>

namespace echodyn {

const char* symmetry_class_name(SymmetryClass c) {
  return c == SymmetryClass::ComplexHermitian ? "complex-hermitian" : "real-symmetric";
}

const char* entry_law_name(EntryLaw l) { return l == EntryLaw::Gaussian ? "gaussian" : "rademacher"; }

std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 sample_rng(std::uint64_t master, std::uint64_t index) {
  return std::mt19937_64(sample_seed(master, index));
}

WignerSample sample_wigner(int N, SymmetryClass cls, std::uint64_t seed, EntryLaw law) {
  if (N < 2) throw Error(ErrorKind::InvalidArgument, "N must be >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::bernoulli_distribution coin;
  auto draw = [&]() { return law == EntryLaw::Gaussian ? gauss(rng) : (coin(rng) ? 1.0 : -1.0); };
  const double s = 1.0 / std::sqrt(double(N));
  const bool complex = cls == SymmetryClass::ComplexHermitian;
  MatC w(N, N);
  for (int j = 0; j < N; ++j) {
    double d = draw();
    if (!complex && law == EntryLaw::Gaussian) d *= std::sqrt(2.0);
    w(j, j) = d * s;
    for (int i = j + 1; i < N; ++i) {
      cplx v = complex ? cplx(draw(), draw()) * (s / std::sqrt(2.0)) : cplx(draw() * s, 0.0);
      w(i, j) = v;
      w(j, i) = std::conj(v);
    }
  }
  return {std::move(w), cls, seed, law};
}

PairShape pair_shape_from_name(const std::string& name) {
  if (name == "zero-plus-direction" || name == "A") return PairShape::ZeroPlusDirection;
  if (name == "balanced-diagonal" || name == "B") return PairShape::BalancedDiagonal;
  if (name == "rotated" || name == "C") return PairShape::Rotated;
  throw Error(ErrorKind::InvalidArgument, "unknown deformation shape '" + name + "'");
}

const char* pair_shape_name(PairShape s) {
  switch (s) {
    case PairShape::ZeroPlusDirection: return "zero-plus-direction";
    case PairShape::BalancedDiagonal: return "balanced-diagonal";
    case PairShape::Rotated: return "rotated";
  }
  return "?";
}

MatC haar_unitary(int N, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  MatC g(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) g(i, j) = cplx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<MatC> qr(g);
  MatC q = qr.householderQ();
  const MatC r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < N; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

std::pair<Deformation, Deformation> sample_deformation_pair(PairShape shape, double delta, int N,
                                                            std::uint64_t seed, double norm_bound) {
  if (!(delta >= 0)) throw Error(ErrorKind::InvalidArgument, "Delta must be >= 0");
  if (N < 2 || N % 2 != 0) throw Error(ErrorKind::ShapeInfeasible, "shapes need an even N >= 2");
  VecD alt(N), halves(N);
  for (int i = 0; i < N; ++i) {
    alt[i] = i % 2 == 0 ? 1.0 : -1.0;
    halves[i] = i < N / 2 ? 1.0 : -1.0;
  }
  if ((shape == PairShape::ZeroPlusDirection ? delta : 1.0 + delta) > norm_bound)
    throw Error(ErrorKind::ShapeInfeasible, "||D_j|| would exceed the norm bound");
  try {
    switch (shape) {
      case PairShape::ZeroPlusDirection: {
        Deformation d1 = Deformation::zero(N, norm_bound);
        if (delta == 0) return {d1, d1};
        return {d1, Deformation::diagonal(delta * alt, norm_bound)};
      }
      case PairShape::BalancedDiagonal: {
        Deformation d1 = Deformation::diagonal(halves, norm_bound);
        if (delta == 0) return {d1, d1};
        return {d1, Deformation::diagonal(halves + delta * alt, norm_bound)};
      }
      case PairShape::Rotated: {
        Deformation d1 = Deformation::diagonal(halves, norm_bound);
        if (delta == 0) return {d1, d1};
        std::mt19937_64 rng(seed);
        MatC u = haar_unitary(N, rng);
        MatC x = u * (delta * alt).cast<cplx>().asDiagonal() * u.adjoint();
        x = 0.5 * (x + x.adjoint());
        MatC m2 = d1.matrix() + x;
        return {d1, Deformation(m2, norm_bound)};
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::InvalidArgument) throw Error(ErrorKind::ShapeInfeasible, e.what());
    throw;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown shape");
}

MatC unitary_evolution(const SpectralData& S, double t) {
  VecC phase = (S.eigenvalues.cast<cplx>() * (-I1 * t)).array().exp().matrix();
  return S.eigenvectors * phase.asDiagonal() * S.eigenvectors.adjoint();
}

MatC resolvent(const SpectralData& S, cplx z) {
  if (z.imag() == 0.0) throw Error(ErrorKind::InvalidArgument, "resolvent needs Im z != 0");
  VecC g = (S.eigenvalues.cast<cplx>().array() - z).inverse().matrix();
  return S.eigenvectors * g.asDiagonal() * S.eigenvectors.adjoint();
}

}  // namespace echodyn
