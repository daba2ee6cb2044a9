#pragma once

// Numerical checks of the block-splitting and transformation laws that make
// arg Tr(ρ0 U F) gauge invariant. U and U·V are both sampled on the same grid.

#include <algorithm>

#include "mixedphase/gauge.hpp"
#include "mixedphase/holonomy.hpp"

namespace mixedphase {

struct Lemma1Report {
  double trace_split_residual = 0.0;  // |Tr(ρ0 U F) − Σ_B Tr(X_B F_B)|
  double x_law_residual = 0.0;        // max_B ‖X_B[U′] − X_B[U] V_B(τ)‖_F
  bool pass = false;
};

struct Lemma2Report {
  double singleton_residual = 0.0;   // max over 1×1 blocks of ‖F_B[U′] − V_B(τ)† F_B[U]‖
  double degenerate_residual = 0.0;  // same over blocks of multiplicity > 1
  double initial_residual = 0.0;     // max_B ‖F_B[U′; 0] − I‖
  bool pass = false;

  double residual() const { return std::max(singleton_residual, degenerate_residual); }
};

/// X_B[U; τ] = (E_B† ρ0 U(τ) E_B), the B-block of ρ0 U(τ) in the eigenbasis.
ComplexMatrix x_block(const SpectralDecomposition& decomp, const ComplexMatrix& u_end,
                      std::size_t b);

Lemma1Report verify_lemma_1(const SpectralDecomposition& decomp, const UnitaryPath& path,
                            const GaugeTransformation& gauge, const TimeGrid& grid,
                            double split_tol = 1e-10, double law_tol = 1e-7);

Lemma2Report verify_lemma_2(const SpectralDecomposition& decomp, const UnitaryPath& path,
                            const GaugeTransformation& gauge, const TimeGrid& grid,
                            double tol = 1e-7);

/// Same checks for a reference path and its gauged copy, both already
/// sampled on `grid` (as returned by apply_gauge).
Lemma1Report lemma_1_from_samples(const SpectralDecomposition& decomp, const UnitaryPath& base,
                                  const UnitaryPath& gauged, const GaugeTransformation& gauge,
                                  const TimeGrid& grid, double split_tol = 1e-10,
                                  double law_tol = 1e-7);

Lemma2Report lemma_2_from_samples(const SpectralDecomposition& decomp, const UnitaryPath& base,
                                  const UnitaryPath& gauged, const GaugeTransformation& gauge,
                                  const TimeGrid& grid, double tol = 1e-7);

}  // namespace mixedphase
