#pragma once

#include <memory>
#include <string>
#include <vector>

#include "echodyn/types.hpp"

namespace echodyn {

// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct SpectralData {
  VecD eigenvalues;
  MatC eigenvectors;
};

// LAPACK zheevd; throws DecompositionFailure.
SpectralData eigendecompose(const MatC& H);
VecD eigenvalues_only(const MatC& H);

// Distinct eigenvalues of a deformation with their normalized multiplicities.
struct AtomSet {
  VecD values;
  VecD weights;
  std::vector<int> atom_of_eig;  // sorted-eigenvalue index -> atom
};

class Deformation {
 public:
  Deformation();
  explicit Deformation(const MatC& matrix, double norm_bound = 10.0);
  static Deformation diagonal(const VecD& d, double norm_bound = 10.0);
  static Deformation zero(int n, double norm_bound = 10.0);

  int size() const;
  const MatC& matrix() const;
  bool is_diagonal() const;
  double trace() const;  // normalized trace <D>
  double norm() const;   // operator norm
  double norm_bound() const;
  bool traceless(double tol = 1e-12) const;

  const VecD& eigenvalues() const;
  const MatC& eigenvectors() const;
  const AtomSet& atoms() const;

  // C_kl = N^-1 sum_{a in k, b in l} |<u_a, v_b>|^2 over atoms of *this and other.
  std::shared_ptr<const MatD> coupling(const Deformation& other) const;

  // M = f(D) given per-atom values.
  MatC function_of(const VecC& atom_values) const;

  std::uint64_t id() const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

double delta_squared(const Deformation& a, const Deformation& b);

// Matrix files: binary ("EDDM", u32 version, u64 N, N*N little-endian (re,im) f64, row-major)
// or text (first line N, then N*N lines "re im", row-major; '#' comments).
Deformation load_deformation(const std::string& path, double norm_bound = 10.0);
void save_deformation_text(const Deformation& d, const std::string& path);
void save_deformation_binary(const Deformation& d, const std::string& path);

}  // namespace echodyn
