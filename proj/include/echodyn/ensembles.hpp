#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "echodyn/deformation.hpp"

namespace echodyn {

enum class SymmetryClass { ComplexHermitian, RealSymmetric };
enum class EntryLaw { Gaussian, Rademacher };

const char* symmetry_class_name(SymmetryClass c);
const char* entry_law_name(EntryLaw l);

// splitmix64 finalizer of (master, index); one independent stream per sample.
std::uint64_t sample_seed(std::uint64_t master, std::uint64_t index);
std::mt19937_64 sample_rng(std::uint64_t master, std::uint64_t index);

struct WignerSample {
  MatC matrix;
  SymmetryClass symmetry_class = SymmetryClass::ComplexHermitian;
  std::uint64_t seed = 0;
  EntryLaw entry_law = EntryLaw::Gaussian;
};

// E|w_ij|^2 = 1/N off the diagonal; diagonal variance 1/N (complex) or 2/N (real, Gaussian law).
WignerSample sample_wigner(int N, SymmetryClass cls, std::uint64_t seed,
                           EntryLaw law = EntryLaw::Gaussian);

enum class PairShape {
  ZeroPlusDirection,  // D1 = 0, D2 = Delta * diag(+1, -1, +1, ...)
  BalancedDiagonal,   // D1 = diag(+1 on first half, -1 on second), D2 = D1 + Delta * diag(+-1 alternating)
  Rotated,            // D1 as BalancedDiagonal, D2 = D1 + Delta * U diag(+-1 alternating) U*, U Haar
};

PairShape pair_shape_from_name(const std::string& name);
const char* pair_shape_name(PairShape s);

std::pair<Deformation, Deformation> sample_deformation_pair(PairShape shape, double delta, int N,
                                                            std::uint64_t seed = 0,
                                                            double norm_bound = 10.0);

MatC haar_unitary(int N, std::mt19937_64& rng);

// Columns of U scaled by exp(-i t mu) times U*.
MatC unitary_evolution(const SpectralData& S, double t);
MatC resolvent(const SpectralData& S, cplx z);

}  // namespace echodyn
