#include "mixedphase/lemmas.hpp"

#include <algorithm>

namespace mixedphase {

ComplexMatrix x_block(const SpectralDecomposition& decomp, const ComplexMatrix& u_end,
                      std::size_t b) {
  const ComplexMatrix frame = decomp.block_frame(b);
  return frame.adjoint() * decomp.state.matrix() * u_end * frame;
}

namespace {

struct GaugedPair {
  UnitaryPath base;
  UnitaryPath gauged;
};

GaugedPair sample_pair(const SpectralDecomposition& decomp, const UnitaryPath& path,
                       const GaugeTransformation& gauge, const TimeGrid& grid) {
  return {apply_gauge(path, GaugeTransformation::identity(decomp.structure), decomp, grid),
          apply_gauge(path, gauge, decomp, grid)};
}

}  // namespace

Lemma1Report verify_lemma_1(const SpectralDecomposition& decomp, const UnitaryPath& path,
                            const GaugeTransformation& gauge, const TimeGrid& grid,
                            double split_tol, double law_tol) {
  const GaugedPair p = sample_pair(decomp, path, gauge, grid);
  return lemma_1_from_samples(decomp, p.base, p.gauged, gauge, grid, split_tol, law_tol);
}

Lemma2Report verify_lemma_2(const SpectralDecomposition& decomp, const UnitaryPath& path,
                            const GaugeTransformation& gauge, const TimeGrid& grid, double tol) {
  const GaugedPair p = sample_pair(decomp, path, gauge, grid);
  return lemma_2_from_samples(decomp, p.base, p.gauged, gauge, grid, tol);
}

Lemma1Report lemma_1_from_samples(const SpectralDecomposition& decomp, const UnitaryPath& base,
                                  const UnitaryPath& gauged, const GaugeTransformation& gauge,
                                  const TimeGrid& grid, double split_tol, double law_tol) {
  const HolonomyFunctional f = f_functional(decomp, base, grid);
  const ComplexMatrix u = base.end();
  const ComplexMatrix u_prime = gauged.end();
  const ComplexMatrix& e = decomp.eigenbasis;

  const Complex whole = (decomp.state.matrix() * u * e * f.end() * e.adjoint()).trace();
  Complex split(0.0, 0.0);
  Lemma1Report rep;
  for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
    const ComplexMatrix x = x_block(decomp, u, b);
    split += (x * f.block_end(b)).trace();
    const ComplexMatrix x_prime = x_block(decomp, u_prime, b);
    const ComplexMatrix v = gauge.block_at(b, grid.duration());
    rep.x_law_residual = std::max(rep.x_law_residual, (x_prime - x * v).norm());
  }
  rep.trace_split_residual = std::abs(whole - split);
  rep.pass = rep.trace_split_residual < split_tol && rep.x_law_residual < law_tol;
  return rep;
}

Lemma2Report lemma_2_from_samples(const SpectralDecomposition& decomp, const UnitaryPath& base,
                                  const UnitaryPath& gauged, const GaugeTransformation& gauge,
                                  const TimeGrid& grid, double tol) {
  const HolonomyFunctional f = f_functional(decomp, base, grid);
  const HolonomyFunctional f_prime = f_functional(decomp, gauged, grid);
  Lemma2Report rep;
  for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
    const ComplexMatrix v = gauge.block_at(b, grid.duration());
    const double r = (f_prime.block_end(b) - v.adjoint() * f.block_end(b)).norm();
    if (decomp.structure.blocks[b].multiplicity == 1) {
      rep.singleton_residual = std::max(rep.singleton_residual, r);
    } else {
      rep.degenerate_residual = std::max(rep.degenerate_residual, r);
    }
    const ComplexMatrix& f0 = f_prime.block(b, 0);
    rep.initial_residual = std::max(
        rep.initial_residual, (f0 - ComplexMatrix::Identity(f0.rows(), f0.cols())).norm());
  }
  rep.pass = rep.residual() < tol && rep.initial_residual < tol;
  return rep;
}

}  // namespace mixedphase
