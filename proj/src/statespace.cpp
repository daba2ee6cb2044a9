#include "mixedphase/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixedphase/generators.hpp"

namespace mixedphase {

DensityMatrix DensityMatrix::validate(const ComplexMatrix& m, double tol) {
  require_square_finite(m, "density matrix");
  const double defect = hermiticity_defect(m);
  if (defect > tol * std::max(1.0, m.norm())) {
    throw Error(ErrorKind::NotHermitian,
                "density matrix: ‖ρ − ρ†‖_F = " + std::to_string(defect));
  }
  const Complex trace = m.trace();
  if (std::abs(trace - Complex(1.0, 0.0)) > tol) {
    throw Error(ErrorKind::TraceNotOne, "density matrix: Tr ρ = " + std::to_string(trace.real()) +
                                            (trace.imag() != 0.0
                                                 ? " + " + std::to_string(trace.imag()) + "i"
                                                 : std::string()));
  }
  const EigenSystem eig = hermitian_eig(m, tol);
  if (eig.values(0) < -tol) {
    throw Error(ErrorKind::NotPositive,
                "density matrix: smallest eigenvalue " + std::to_string(eig.values(0)));
  }
  return DensityMatrix(m);
}

std::vector<Eigen::Index> Block::indices() const {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(multiplicity));
  for (Eigen::Index k = 0; k < multiplicity; ++k) out[static_cast<std::size_t>(k)] = offset + k;
  return out;
}

Eigen::Index DegeneracyStructure::dim() const {
  Eigen::Index n = 0;
  for (const auto& b : blocks) n += b.multiplicity;
  return n;
}

bool DegeneracyStructure::all_singletons() const {
  return std::all_of(blocks.begin(), blocks.end(),
                     [](const Block& b) { return b.multiplicity == 1; });
}

std::vector<Eigen::Index> DegeneracyStructure::multiplicities() const {
  std::vector<Eigen::Index> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(b.multiplicity);
  return out;
}

ComplexMatrix SpectralDecomposition::block_frame(std::size_t b) const {
  const Block& blk = structure.blocks.at(b);
  return eigenbasis.middleCols(blk.offset, blk.multiplicity);
}

SpectralDecomposition spectral_decompose(const DensityMatrix& rho, double degeneracy_tol) {
  const EigenSystem eig = hermitian_eig(rho.matrix());
  const Eigen::Index n = rho.dim();

  // Reverse the ascending order cluster by cluster so that the canonical
  // in-cluster ordering from hermitian_eig survives.
  const auto clusters = value_clusters(eig.values, 1e-13 * std::max(1.0, rho.matrix().norm()));
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<std::size_t>(n));
  for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
    for (Eigen::Index k = it->first; k < it->second; ++k) order.push_back(k);
  }

  SpectralDecomposition out{rho, RealVector(n), ComplexMatrix(n, n), {}};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues(j) = eig.values(src);
    out.eigenbasis.col(j) = eig.vectors.col(src);
  }

  Eigen::Index first = 0;
  for (Eigen::Index j = 1; j <= n; ++j) {
    if (j == n || out.eigenvalues(j - 1) - out.eigenvalues(j) > degeneracy_tol) {
      const Eigen::Index mult = j - first;
      const double weight = out.eigenvalues.segment(first, mult).mean();
      out.structure.blocks.push_back(Block{weight, first, mult});
      first = j;
    }
  }
  return out;
}

SpectralDecomposition rotate_block_bases(const SpectralDecomposition& decomp,
                                         const ComplexMatrix& rotation) {
  const Eigen::Index n = decomp.eigenbasis.rows();
  if (rotation.rows() != n || rotation.cols() != n) {
    throw Error(ErrorKind::StructureMismatch, "basis rotation has the wrong dimension");
  }
  ComplexMatrix off_block = rotation;
  for (const auto& b : decomp.structure.blocks) {
    off_block.block(b.offset, b.offset, b.multiplicity, b.multiplicity).setZero();
  }
  if (off_block.norm() > kDefaultUnitaryTol || unitarity_defect(rotation) > kDefaultUnitaryTol) {
    throw Error(ErrorKind::StructureMismatch,
                "basis rotation must be unitary and block diagonal in the eigenbasis");
  }
  SpectralDecomposition out = decomp;
  out.eigenbasis = decomp.eigenbasis * rotation;
  return out;
}

DensityMatrix evolve_density(const DensityMatrix& rho0, const ComplexMatrix& u, double tol) {
  require_square_finite(u, "evolution operator");
  if (u.rows() != rho0.dim()) {
    throw Error(ErrorKind::InvalidMatrix, "evolution operator dimension does not match the state");
  }
  const double defect = unitarity_defect(u);
  if (defect > tol) {
    throw Error(ErrorKind::NotUnitary, "evolution operator: ‖U†U − I‖_F = " + std::to_string(defect));
  }
  return DensityMatrix::validate(u * rho0.matrix() * u.adjoint(),
                                 std::max(kDefaultStateTol, 10.0 * tol));
}

std::vector<ComplexMatrix> generator_set(Eigen::Index dim) {
  std::vector<ComplexMatrix> out;
  if (dim == 2) {
    for (int i = 1; i <= 3; ++i) out.push_back(pauli(i));
  } else if (dim == 3) {
    for (int i = 1; i <= 8; ++i) out.push_back(gell_mann(i));
  } else {
    throw Error(ErrorKind::UnsupportedDimension,
                "coherence vectors are defined for N = 2 or 3, got N = " + std::to_string(dim));
  }
  return out;
}

std::vector<double> coherence_vector(const DensityMatrix& rho) {
  const auto gens = generator_set(rho.dim());
  const double scale = static_cast<double>(rho.dim()) / 2.0;
  std::vector<double> r;
  r.reserve(gens.size());
  for (const auto& g : gens) r.push_back(scale * (rho.matrix() * g).trace().real());
  return r;
}

ComplexMatrix from_coherence_vector(const std::vector<double>& r, Eigen::Index dim) {
  const auto gens = generator_set(dim);
  if (r.size() != gens.size()) {
    throw Error(ErrorKind::UnsupportedDimension, "coherence vector length does not match N");
  }
  ComplexMatrix m = ComplexMatrix::Identity(dim, dim);
  for (std::size_t i = 0; i < gens.size(); ++i) m += r[i] * gens[i];
  return m / static_cast<double>(dim);
}

}  // namespace mixedphase
