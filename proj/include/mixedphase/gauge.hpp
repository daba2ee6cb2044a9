#pragma once

// Little-group gauge transformations U(t) → U(t) V(t). Gauges live in the
// eigenbasis of ρ(0), where the little group is block diagonal, and are
// conjugated into the computational basis only when applied to a path.

#include <cstdint>
#include <vector>

#include "mixedphase/paths.hpp"
#include "mixedphase/statespace.hpp"

namespace mixedphase {

/// V_B(t) for one block: piecewise-constant Hermitian generators,
/// V_B(t) = exp(−i G_k (t − s_k)) V_B(s_k). The last segment extends past its
/// nominal end.
class BlockGauge {
 public:
  BlockGauge() = default;
  BlockGauge(Eigen::Index multiplicity, std::vector<GeneratorSegment> segments);

  static BlockGauge identity(Eigen::Index multiplicity);

  Eigen::Index multiplicity() const noexcept { return multiplicity_; }
  const std::vector<GeneratorSegment>& segments() const noexcept { return segments_; }
  ComplexMatrix at(double t) const;

 private:
  Eigen::Index multiplicity_ = 0;
  std::vector<GeneratorSegment> segments_;
  std::vector<EigenSystem> eig_;
  std::vector<double> starts_;
  std::vector<ComplexMatrix> prefix_;
};

class GaugeTransformation {
 public:
  GaugeTransformation(DegeneracyStructure structure, std::vector<BlockGauge> blocks);

  static GaugeTransformation identity(const DegeneracyStructure& structure);

  const DegeneracyStructure& structure() const noexcept { return structure_; }
  const std::vector<BlockGauge>& blocks() const noexcept { return blocks_; }

  /// Block-diagonal V(t) in the eigenbasis.
  ComplexMatrix at(double t) const;
  ComplexMatrix block_at(std::size_t b, double t) const { return blocks_.at(b).at(t); }

 private:
  DegeneracyStructure structure_;
  std::vector<BlockGauge> blocks_;
};

/// Sampled path U′(t_j) = U(t_j) E V(t_j) E†, E the eigenbasis of `decomp`.
UnitaryPath apply_gauge(const UnitaryPath& path, const GaugeTransformation& gauge,
                        const SpectralDecomposition& decomp, const TimeGrid& grid);

/// Constant gauge V(t) = exp(−i G t) from a generator G given in the
/// computational basis. G must commute with ρ(0), i.e. be block diagonal in
/// the eigenbasis; StructureMismatch otherwise.
GaugeTransformation constant_gauge(const SpectralDecomposition& decomp, const ComplexMatrix& g,
                                   double duration);

/// Diagonal gauge e^{iθ_k(t)} with θ_k(t) = rates[k]·t, for all-singleton
/// structures.
GaugeTransformation phase_gauge(const DegeneracyStructure& structure,
                                const std::vector<double>& rates, double duration);

/// Seeded random gauge: each block gets `segments` equal-length segments of
/// [0, duration] with Hermitian generators whose entries are bounded by
/// `amplitude` in real and imaginary part.
GaugeTransformation random_gauge(const DegeneracyStructure& structure, std::uint64_t seed,
                                 std::size_t segments, double amplitude, double duration);

/// (V·W)(t) = V(t) W(t), realised on the grid as a sampled composition.
UnitaryPath apply_gauges(const UnitaryPath& path, const std::vector<const GaugeTransformation*>& gauges,
                         const SpectralDecomposition& decomp, const TimeGrid& grid);

}  // namespace mixedphase
