#include "echodyn/deformation.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>

#include "echodyn/platform.hpp"

namespace echodyn {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ConstraintViolation: return "ConstraintViolation";
    case ErrorKind::EmptyBulk: return "EmptyBulk";
    case ErrorKind::ContinuationDiverged: return "ContinuationDiverged";
    case ErrorKind::DegenerateStability: return "DegenerateStability";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::QuadratureUnderResolved: return "QuadratureUnderResolved";
    case ErrorKind::NoBracket: return "NoBracket";
    case ErrorKind::NewtonStall: return "NewtonStall";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::ExtrapolationUnstable: return "ExtrapolationUnstable";
    case ErrorKind::RadiusTooSmall: return "RadiusTooSmall";
    case ErrorKind::DecompositionFailure: return "DecompositionFailure";
    case ErrorKind::ShapeInfeasible: return "ShapeInfeasible";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::EnergyUnreachable: return "EnergyUnreachable";
    case ErrorKind::EmptyAdmissibleSet: return "EmptyAdmissibleSet";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::ResourceExceeded: return "ResourceExceeded";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

static void require_blas() {
  if (!blas_kernel_ok())
    throw Error(ErrorKind::DecompositionFailure,
                "BLAS dgemm self-test failed; select a working kernel with OPENBLAS_CORETYPE (e.g. Haswell)");
}

SpectralData eigendecompose(const MatC& H) {
  const int n = static_cast<int>(H.rows());
  if (n != H.cols()) throw Error(ErrorKind::DecompositionFailure, "matrix not square");
  SpectralData s;
  s.eigenvectors = H;
  s.eigenvalues.resize(n);
  if (n == 0) return s;
  bool diag = true;
  for (int j = 0; j < n && diag; ++j)
    for (int i = 0; i < n; ++i)
      if (i != j ? H(i, j) != cplx(0.0) : H(i, i).imag() != 0.0) {
        diag = false;
        break;
      }
  if (diag) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return H(a, a).real() < H(b, b).real(); });
    s.eigenvectors.setZero();
    for (int j = 0; j < n; ++j) {
      s.eigenvalues[j] = H(order[j], order[j]).real();
      s.eigenvectors(order[j], j) = 1.0;
    }
    return s;
  }
  require_blas();
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(s.eigenvectors.data()), n,
                            s.eigenvalues.data());
  if (info != 0) throw Error(ErrorKind::DecompositionFailure, "zheevd info=" + std::to_string(info));
  return s;
}

VecD eigenvalues_only(const MatC& H) {
  const int n = static_cast<int>(H.rows());
  MatC a = H;
  VecD w(n);
  if (n == 0) return w;
  require_blas();
  int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                            reinterpret_cast<lapack_complex_double*>(a.data()), n, w.data());
  if (info != 0) throw Error(ErrorKind::DecompositionFailure, "zheevd info=" + std::to_string(info));
  return w;
}

namespace {

std::atomic<std::uint64_t> g_next_id{1};

AtomSet group_atoms(const VecD& sorted) {
  AtomSet a;
  const int n = static_cast<int>(sorted.size());
  std::vector<double> vals, wts;
  a.atom_of_eig.resize(n);
  int start = 0;
  for (int j = 1; j <= n; ++j) {
    bool split = j == n;
    if (!split) {
      double tol = 1e-12 * std::max(1.0, std::abs(sorted[j]));
      split = sorted[j] - sorted[start] > tol;
    }
    if (split) {
      double mean = 0;
      for (int k = start; k < j; ++k) mean += sorted[k];
      mean /= (j - start);
      for (int k = start; k < j; ++k) a.atom_of_eig[k] = static_cast<int>(vals.size());
      vals.push_back(mean);
      wts.push_back(double(j - start) / n);
      start = j;
    }
  }
  a.values = Eigen::Map<VecD>(vals.data(), vals.size());
  a.weights = Eigen::Map<VecD>(wts.data(), wts.size());
  return a;
}

}  // namespace

struct Deformation::Impl {
  MatC matrix;
  double bound = 10.0;
  bool diagonal = false;
  VecD evals;
  std::vector<int> basis_of_eig;  // diagonal case: eigenvalue index -> basis index
  AtomSet atoms;
  std::uint64_t id = 0;

  mutable std::mutex mu;
  mutable MatC evecs;
  mutable bool have_evecs = false;
  mutable std::map<std::uint64_t, std::shared_ptr<const MatD>> couplings;

  const MatC& vectors() const {
    std::lock_guard<std::mutex> lk(mu);
    if (!have_evecs) {
      const int n = static_cast<int>(evals.size());
      evecs = MatC::Zero(n, n);
      for (int j = 0; j < n; ++j) evecs(basis_of_eig[j], j) = 1.0;
      have_evecs = true;
    }
    return evecs;
  }
};

Deformation::Deformation() : Deformation(Deformation::zero(1)) {}

Deformation::Deformation(const MatC& m, double norm_bound) : impl_(std::make_shared<Impl>()) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw Error(ErrorKind::InvalidArgument, "deformation must be a non-empty square matrix");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorKind::InvalidArgument, "deformation is not Hermitian");
  MatC h = 0.5 * (m + m.adjoint());
  impl_->matrix = h;
  impl_->bound = norm_bound;
  impl_->id = g_next_id++;
  const int n = static_cast<int>(h.rows());
  MatC off = h;
  off.diagonal().setZero();
  impl_->diagonal = off.cwiseAbs().maxCoeff() == 0.0;
  if (impl_->diagonal) {
    VecD d = h.diagonal().real();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] < d[b]; });
    impl_->evals.resize(n);
    for (int j = 0; j < n; ++j) impl_->evals[j] = d[idx[j]];
    impl_->basis_of_eig = idx;
  } else {
    SpectralData s = eigendecompose(h);
    impl_->evals = s.eigenvalues;
    impl_->evecs = std::move(s.eigenvectors);
    impl_->have_evecs = true;
  }
  impl_->atoms = group_atoms(impl_->evals);
  double nrm = std::max(std::abs(impl_->evals[0]), std::abs(impl_->evals[n - 1]));
  if (nrm > norm_bound * (1 + 1e-12))
    throw Error(ErrorKind::InvalidArgument, "deformation norm exceeds bound L");
}

Deformation Deformation::diagonal(const VecD& d, double norm_bound) {
  MatC m = MatC::Zero(d.size(), d.size());
  m.diagonal() = d.cast<cplx>();
  return Deformation(m, norm_bound);
}

Deformation Deformation::zero(int n, double norm_bound) {
  return diagonal(VecD::Zero(n), norm_bound);
}

int Deformation::size() const { return static_cast<int>(impl_->evals.size()); }
const MatC& Deformation::matrix() const { return impl_->matrix; }
bool Deformation::is_diagonal() const { return impl_->diagonal; }
double Deformation::trace() const { return impl_->evals.mean(); }
double Deformation::norm() const {
  return std::max(std::abs(impl_->evals[0]), std::abs(impl_->evals[size() - 1]));
}
double Deformation::norm_bound() const { return impl_->bound; }
bool Deformation::traceless(double tol) const { return std::abs(trace()) < tol; }
const VecD& Deformation::eigenvalues() const { return impl_->evals; }
const MatC& Deformation::eigenvectors() const { return impl_->vectors(); }
const AtomSet& Deformation::atoms() const { return impl_->atoms; }
std::uint64_t Deformation::id() const { return impl_->id; }

MatC Deformation::function_of(const VecC& atom_values) const {
  const int n = size();
  VecC per_eig(n);
  for (int j = 0; j < n; ++j) per_eig[j] = atom_values[impl_->atoms.atom_of_eig[j]];
  if (impl_->diagonal) {
    MatC out = MatC::Zero(n, n);
    for (int j = 0; j < n; ++j) out(impl_->basis_of_eig[j], impl_->basis_of_eig[j]) = per_eig[j];
    return out;
  }
  const MatC& u = eigenvectors();
  return u * per_eig.asDiagonal() * u.adjoint();
}

std::shared_ptr<const MatD> Deformation::coupling(const Deformation& other) const {
  {
    std::lock_guard<std::mutex> lk(impl_->mu);
    auto it = impl_->couplings.find(other.id());
    if (it != impl_->couplings.end()) return it->second;
  }
  const int n = size();
  if (other.size() != n) throw Error(ErrorKind::InvalidArgument, "deformation sizes differ");
  const AtomSet& a = atoms();
  const AtomSet& b = other.atoms();
  auto c = std::make_shared<MatD>(MatD::Zero(a.values.size(), b.values.size()));
  if (other.id() == id()) {
    c->diagonal() = a.weights;
  } else if (is_diagonal() && other.is_diagonal()) {
    std::vector<int> atom_b(n);
    for (int j = 0; j < n; ++j) atom_b[other.impl_->basis_of_eig[j]] = b.atom_of_eig[j];
    for (int j = 0; j < n; ++j)
      (*c)(a.atom_of_eig[j], atom_b[impl_->basis_of_eig[j]]) += 1.0 / n;
  } else {
    MatD ov = (eigenvectors().adjoint() * other.eigenvectors()).cwiseAbs2();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) (*c)(a.atom_of_eig[i], b.atom_of_eig[j]) += ov(i, j) / n;
  }
  std::lock_guard<std::mutex> lk(impl_->mu);
  impl_->couplings[other.id()] = c;
  return c;
}

double delta_squared(const Deformation& a, const Deformation& b) {
  MatC d = a.matrix() - b.matrix();
  return d.squaredNorm() / a.size();
}

namespace {

constexpr char kMagic[4] = {'E', 'D', 'D', 'M'};

template <class T>
T to_le(T v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  std::reverse(b, b + sizeof(T));
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

Deformation load_deformation(const std::string& path, double norm_bound) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  char magic[4] = {0, 0, 0, 0};
  in.read(magic, 4);
  if (in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0) {
    std::uint32_t version = 0;
    std::uint64_t n = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    version = to_le(version);
    n = to_le(n);
    if (version != 1) throw Error(ErrorKind::Io, "unsupported matrix file version");
    MatC m(n, n);
    for (std::uint64_t i = 0; i < n; ++i)
      for (std::uint64_t j = 0; j < n; ++j) {
        double re, im;
        in.read(reinterpret_cast<char*>(&re), 8);
        in.read(reinterpret_cast<char*>(&im), 8);
        m(i, j) = cplx(to_le(re), to_le(im));
      }
    if (!in) throw Error(ErrorKind::Io, "truncated matrix file " + path);
    return Deformation(m, norm_bound);
  }
  in.clear();
  in.seekg(0);
  std::string line;
  std::vector<double> nums;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    double x;
    while (ls >> x) nums.push_back(x);
  }
  if (nums.empty()) throw Error(ErrorKind::Io, "empty matrix file " + path);
  auto n = static_cast<std::size_t>(nums[0]);
  if (nums.size() != 1 + 2 * n * n) throw Error(ErrorKind::Io, "matrix file size mismatch " + path);
  MatC m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = cplx(nums[1 + 2 * (i * n + j)], nums[2 + 2 * (i * n + j)]);
  return Deformation(m, norm_bound);
}

void save_deformation_text(const Deformation& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.precision(17);
  const MatC& m = d.matrix();
  out << m.rows() << "\n";
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) out << m(i, j).real() << " " << m(i, j).imag() << "\n";
}

void save_deformation_binary(const Deformation& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(kMagic, 4);
  std::uint32_t version = to_le<std::uint32_t>(1);
  std::uint64_t n = to_le<std::uint64_t>(d.size());
  out.write(reinterpret_cast<const char*>(&version), sizeof version);
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  const MatC& m = d.matrix();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      double re = to_le(m(i, j).real()), im = to_le(m(i, j).imag());
      out.write(reinterpret_cast<const char*>(&re), 8);
      out.write(reinterpret_cast<const char*>(&im), 8);
    }
}

}  // namespace echodyn
