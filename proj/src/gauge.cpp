#include "mixedphase/gauge.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mixedphase {

BlockGauge::BlockGauge(Eigen::Index multiplicity, std::vector<GeneratorSegment> segments)
    : multiplicity_(multiplicity), segments_(std::move(segments)) {
  ComplexMatrix v = ComplexMatrix::Identity(multiplicity, multiplicity);
  double start = 0.0;
  for (const auto& s : segments_) {
    if (s.generator.rows() != multiplicity || s.generator.cols() != multiplicity) {
      throw Error(ErrorKind::StructureMismatch, "gauge generator does not match block size");
    }
    if (!(s.duration > 0.0)) throw Error(ErrorKind::InvalidPath, "gauge segment without duration");
    eig_.push_back(hermitian_eig(s.generator));
    starts_.push_back(start);
    prefix_.push_back(v);
    v = exp_skew(eig_.back(), s.duration) * v;
    start += s.duration;
  }
}

BlockGauge BlockGauge::identity(Eigen::Index multiplicity) { return BlockGauge(multiplicity, {}); }

ComplexMatrix BlockGauge::at(double t) const {
  if (segments_.empty()) return ComplexMatrix::Identity(multiplicity_, multiplicity_);
  std::size_t k = 0;
  while (k + 1 < segments_.size() && t >= starts_[k + 1]) ++k;
  return exp_skew(eig_[k], t - starts_[k]) * prefix_[k];
}

GaugeTransformation::GaugeTransformation(DegeneracyStructure structure,
                                         std::vector<BlockGauge> blocks)
    : structure_(std::move(structure)), blocks_(std::move(blocks)) {
  if (blocks_.size() != structure_.blocks.size()) {
    throw Error(ErrorKind::StructureMismatch, "gauge needs one factor per degeneracy block");
  }
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (blocks_[b].multiplicity() != structure_.blocks[b].multiplicity) {
      throw Error(ErrorKind::StructureMismatch,
                  "gauge factor " + std::to_string(b) + " does not match block multiplicity");
    }
  }
}

GaugeTransformation GaugeTransformation::identity(const DegeneracyStructure& structure) {
  std::vector<BlockGauge> blocks;
  for (const auto& b : structure.blocks) blocks.push_back(BlockGauge::identity(b.multiplicity));
  return GaugeTransformation(structure, std::move(blocks));
}

ComplexMatrix GaugeTransformation::at(double t) const {
  const Eigen::Index n = structure_.dim();
  ComplexMatrix v = ComplexMatrix::Zero(n, n);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const Block& blk = structure_.blocks[b];
    v.block(blk.offset, blk.offset, blk.multiplicity, blk.multiplicity) = blocks_[b].at(t);
  }
  return v;
}

namespace {

void require_same_structure(const DegeneracyStructure& a, const DegeneracyStructure& b) {
  if (a.multiplicities() != b.multiplicities()) {
    throw Error(ErrorKind::StructureMismatch,
                "gauge block structure does not match the state's degeneracy structure");
  }
}

}  // namespace

UnitaryPath apply_gauges(const UnitaryPath& path,
                         const std::vector<const GaugeTransformation*>& gauges,
                         const SpectralDecomposition& decomp, const TimeGrid& grid) {
  if (path.dim() != decomp.eigenbasis.rows()) {
    throw Error(ErrorKind::StructureMismatch, "path and state dimensions differ");
  }
  for (const auto* g : gauges) require_same_structure(g->structure(), decomp.structure);
  const auto samples = sample_path(path, grid);
  const ComplexMatrix& e = decomp.eigenbasis;
  std::vector<double> times;
  std::vector<ComplexMatrix> out;
  times.reserve(grid.nodes());
  out.reserve(grid.nodes());
  for (std::size_t j = 0; j < grid.nodes(); ++j) {
    const double t = grid.node(j);
    ComplexMatrix v = ComplexMatrix::Identity(path.dim(), path.dim());
    for (const auto* g : gauges) v = v * g->at(t);
    times.push_back(t);
    out.push_back(j == 0 ? samples[0] : ComplexMatrix(samples[j] * e * v * e.adjoint()));
  }
  return UnitaryPath::sampled(std::move(times), std::move(out));
}

UnitaryPath apply_gauge(const UnitaryPath& path, const GaugeTransformation& gauge,
                        const SpectralDecomposition& decomp, const TimeGrid& grid) {
  return apply_gauges(path, {&gauge}, decomp, grid);
}

GaugeTransformation constant_gauge(const SpectralDecomposition& decomp, const ComplexMatrix& g,
                                   double duration) {
  require_square_finite(g, "gauge generator");
  if (g.rows() != decomp.eigenbasis.rows()) {
    throw Error(ErrorKind::StructureMismatch, "gauge generator has the wrong dimension");
  }
  const ComplexMatrix ge = decomp.eigenbasis.adjoint() * g * decomp.eigenbasis;
  ComplexMatrix off = ge;
  std::vector<BlockGauge> blocks;
  for (const auto& b : decomp.structure.blocks) {
    ComplexMatrix sub = ge.block(b.offset, b.offset, b.multiplicity, b.multiplicity);
    off.block(b.offset, b.offset, b.multiplicity, b.multiplicity).setZero();
    blocks.emplace_back(b.multiplicity, std::vector<GeneratorSegment>{{0.5 * (sub + sub.adjoint()), duration}});
  }
  if (off.norm() > 1e-9 * std::max(1.0, g.norm())) {
    throw Error(ErrorKind::StructureMismatch,
                "gauge generator does not commute with ρ(0) (off-block norm " +
                    std::to_string(off.norm()) + ")");
  }
  return GaugeTransformation(decomp.structure, std::move(blocks));
}

GaugeTransformation phase_gauge(const DegeneracyStructure& structure,
                                const std::vector<double>& rates, double duration) {
  if (!structure.all_singletons() || rates.size() != structure.blocks.size()) {
    throw Error(ErrorKind::StructureMismatch, "phase gauges need one rate per singleton block");
  }
  std::vector<BlockGauge> blocks;
  for (double rate : rates) {
    // e^{iθ t} = exp(−i (−θ) t)
    ComplexMatrix g(1, 1);
    g(0, 0) = -rate;
    blocks.emplace_back(1, std::vector<GeneratorSegment>{{g, duration}});
  }
  return GaugeTransformation(structure, std::move(blocks));
}

GaugeTransformation random_gauge(const DegeneracyStructure& structure, std::uint64_t seed,
                                 std::size_t segments, double amplitude, double duration) {
  if (segments < 1) throw Error(ErrorKind::ParameterOutOfRange, "random gauge needs ≥ 1 segment");
  if (amplitude < 0.0 || !(duration > 0.0)) {
    throw Error(ErrorKind::ParameterOutOfRange, "random gauge needs amplitude ≥ 0, duration > 0");
  }
  std::mt19937_64 rng(seed);
  // Fixed 53-bit mapping so the stream is identical on every platform.
  auto uniform = [&]() {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return amplitude * (2.0 * u - 1.0);
  };
  const double seg_len = duration / static_cast<double>(segments);
  std::vector<BlockGauge> blocks;
  for (const auto& b : structure.blocks) {
    const Eigen::Index m = b.multiplicity;
    std::vector<GeneratorSegment> segs;
    for (std::size_t s = 0; s < segments; ++s) {
      ComplexMatrix g = ComplexMatrix::Zero(m, m);
      for (Eigen::Index r = 0; r < m; ++r) {
        g(r, r) = uniform();
        for (Eigen::Index c = r + 1; c < m; ++c) {
          const double re = uniform();
          const double im = uniform();
          g(r, c) = Complex(re, im);
          g(c, r) = Complex(re, -im);
        }
      }
      segs.push_back({g, seg_len});
    }
    blocks.emplace_back(m, std::move(segs));
  }
  return GaugeTransformation(structure, std::move(blocks));
}

}  // namespace mixedphase
