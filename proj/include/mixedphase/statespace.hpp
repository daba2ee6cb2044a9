#pragma once

#include <cstddef>
#include <vector>

#include "mixedphase/matcore.hpp"

namespace mixedphase {

inline constexpr double kDefaultStateTol = 1e-10;
inline constexpr double kDefaultDegeneracyTol = 1e-9;

/// A validated state: Hermitian, positive semi-definite and unit trace, each
/// within the tolerance it was checked against. Never repaired silently.
class DensityMatrix {
 public:
  static DensityMatrix validate(const ComplexMatrix& m, double tol = kDefaultStateTol);

  const ComplexMatrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }

 private:
  explicit DensityMatrix(ComplexMatrix m) : m_(std::move(m)) {}
  ComplexMatrix m_;
};

inline DensityMatrix validate_density(const ComplexMatrix& m, double tol = kDefaultStateTol) {
  return DensityMatrix::validate(m, tol);
}

/// One eigenspace of ρ(0). Members are the contiguous eigenbasis columns
/// [offset, offset + multiplicity).
struct Block {
  double weight = 0.0;
  Eigen::Index offset = 0;
  Eigen::Index multiplicity = 0;

  std::vector<Eigen::Index> indices() const;
};

struct DegeneracyStructure {
  std::vector<Block> blocks;  // descending weight

  Eigen::Index dim() const;
  bool all_singletons() const;
  /// Multiplicities, e.g. {2, 1} for the SU(3) example.
  std::vector<Eigen::Index> multiplicities() const;
};

struct SpectralDecomposition {
  DensityMatrix state;
  RealVector eigenvalues;   // descending, aligned with eigenbasis columns
  ComplexMatrix eigenbasis; // unitary; columns |k⟩
  DegeneracyStructure structure;

  /// Columns of the eigenbasis spanning block `b`.
  ComplexMatrix block_frame(std::size_t b) const;
};

/// Eigen-decomposes ρ and groups eigenvalues into blocks by single linkage:
/// sorted neighbours closer than `degeneracy_tol` share a block.
SpectralDecomposition spectral_decompose(const DensityMatrix& rho,
                                         double degeneracy_tol = kDefaultDegeneracyTol);

/// Re-expresses a decomposition in a different orthonormal basis of each
/// block. `rotation` must be block diagonal with unitary blocks.
SpectralDecomposition rotate_block_bases(const SpectralDecomposition& decomp,
                                         const ComplexMatrix& rotation);

/// ρ(τ) = U ρ(0) U†.
DensityMatrix evolve_density(const DensityMatrix& rho0, const ComplexMatrix& u,
                             double tol = kDefaultUnitaryTol);

/// Hermitian generator sets with Tr(g_i g_j) = 2 δ_ij.
std::vector<ComplexMatrix> generator_set(Eigen::Index dim);

/// Components r_i = (N/2) Tr(ρ g_i) in the Pauli (N = 2) or Gell-Mann (N = 3)
/// basis, so that ρ = (I + Σ r_i g_i) / N.
std::vector<double> coherence_vector(const DensityMatrix& rho);

/// Inverse of coherence_vector for an arbitrary dimension-matched vector.
ComplexMatrix from_coherence_vector(const std::vector<double>& r, Eigen::Index dim);

}  // namespace mixedphase
