#pragma once

// Total, dynamical and gauge-invariant geometric phases of a mixed state
// under unitary evolution, built on the block-diagonal holonomy functional F.
//
// For ρ(0) = Σ_k ω_k |k⟩⟨k| with eigenspaces H_B, F[U; t] = ⊕_B F_B where
// F_B solves Ḟ_B = −Ã_B F_B, F_B(0) = I, and Ã_B is the connection U†U̇
// restricted to H_B. The geometric phase is arg Tr(ρ(0) U(τ) F[U; τ]); it
// is unchanged under U → U V for any V(t) in the little group of ρ(0) with
// V(0) = I, because F_B → V_B(τ)† F_B.

#include <optional>
#include <vector>

#include "mixedphase/gauge.hpp"
#include "mixedphase/paths.hpp"
#include "mixedphase/statespace.hpp"

namespace mixedphase {

struct HolonomyOptions {
  double eps_phase = kDefaultEpsPhase;
  double cyclic_tol = 1e-9;
  double real_tol = 1e-9;
  bool convergence_estimate = true;
};

struct PhaseValue {
  double phase = 0.0;       // (−π, π]
  double visibility = 0.0;  // |Tr(U ρ)|
};

class HolonomyFunctional {
 public:
  HolonomyFunctional(DegeneracyStructure structure,
                     std::vector<std::vector<ComplexMatrix>> trajectories);

  /// F ≡ I on `nodes` grid nodes.
  static HolonomyFunctional identity(const DegeneracyStructure& structure, std::size_t nodes);

  const DegeneracyStructure& structure() const noexcept { return structure_; }
  std::size_t nodes() const noexcept { return nodes_; }
  const ComplexMatrix& block(std::size_t b, std::size_t node) const {
    return trajectories_.at(b).at(node);
  }
  const ComplexMatrix& block_end(std::size_t b) const { return trajectories_.at(b).back(); }

  /// ⊕_B F_B(t_node) in the eigenbasis.
  ComplexMatrix assembled(std::size_t node) const;
  ComplexMatrix end() const { return assembled(nodes_ - 1); }

  /// max over nodes and blocks of ‖F_B† F_B − I‖_F.
  double max_unitarity_defect() const;

 private:
  DegeneracyStructure structure_;
  std::vector<std::vector<ComplexMatrix>> trajectories_;  // [block][node]
  std::size_t nodes_;
};

struct PhaseReport {
  std::optional<double> gamma_total;
  double visibility_total = 0.0;
  double gamma_dynamical = 0.0;  // unwrapped
  double gamma_geometric = 0.0;
  double visibility_geometric = 0.0;
  std::optional<double> naive_subtraction;  // γ_T − γ_D
  bool cyclic = false;
  double cyclicity_residual = 0.0;
  double transport_residual = 0.0;       // block conditions on U·F
  double weak_transport_residual = 0.0;  // max_t |Tr(ρ(0) A(t))|
  std::optional<double> convergence_estimate;  // |γ(M) − γ(M/2)|
};

/// arg Tr(U ρ0) and its visibility; UndefinedPhase at zero visibility.
PhaseValue total_phase(const DensityMatrix& rho0, const ComplexMatrix& u_end,
                       double eps_phase = kDefaultEpsPhase);

/// γ_D = −i ∫ Tr(ρ0 U†U̇) dt by midpoint quadrature of the connection.
double dynamical_phase(const DensityMatrix& rho0, const UnitaryPath& path, const TimeGrid& grid,
                       double real_tol = 1e-9);

/// The block-restricted holonomy functional. Generator paths use the
/// midpoint product integrator on their exact connection; sampled paths use
/// covariant block transport of the samples.
HolonomyFunctional f_functional(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                const TimeGrid& grid);

/// Literal reading: the full-space P-exp (which is U(t)†) projected onto each
/// degenerate block. Singletons keep e^{−∫A_kk}. Generally neither unitary
/// per block nor gauge covariant; kept for comparison only.
HolonomyFunctional f_functional_literal(const SpectralDecomposition& decomp,
                                        const UnitaryPath& path, const TimeGrid& grid);

/// arg Σ_k ω_k ⟨k|U(τ)|k⟩ e^{−∫⟨k|U†U̇|k⟩dt}. DegenerateInput unless every
/// block is a singleton.
PhaseReport geometric_phase_nondegenerate(const SpectralDecomposition& decomp,
                                          const UnitaryPath& path, const TimeGrid& grid,
                                          const HolonomyOptions& opts = {});

/// arg Tr(ρ0 U(τ) F[U; τ]) for any block structure.
PhaseReport geometric_phase_general(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                    const TimeGrid& grid, const HolonomyOptions& opts = {});

/// arg Tr(ρ0 U(τ) F_literal[U; τ]).
double geometric_phase_literal(const SpectralDecomposition& decomp, const UnitaryPath& path,
                               const TimeGrid& grid, double eps_phase = kDefaultEpsPhase);

/// max over cells and blocks of the largest entry of F†ÃF + F†Ḟ, evaluated at
/// cell midpoints with central differences. Vanishes (O(Δt²)) iff U·F is
/// parallel transported.
double parallel_transport_residual(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                   const HolonomyFunctional& f, const TimeGrid& grid);

/// max_t |Tr(ρ0 A(t))|, the weak (trace) condition.
double weak_transport_residual(const DensityMatrix& rho0, const UnitaryPath& path,
                               const TimeGrid& grid);

struct IntensitySample {
  double chi = 0.0;
  double intensity = 0.0;
};

/// 1 + ν cos(χ − γ_T). With ν ≤ eps_phase the profile is flat.
std::vector<IntensitySample> interference_profile(const DensityMatrix& rho0,
                                                  const ComplexMatrix& u_end,
                                                  const std::vector<double>& chi,
                                                  double eps_phase = kDefaultEpsPhase);

struct NaiveSubtraction {
  double delta_naive = 0.0;      // circle distance of (γ_T − γ_D) before/after
  double delta_geometric = 0.0;  // circle distance of γ before/after
};

/// Compares U and U·V, both sampled on `grid`.
NaiveSubtraction naive_subtraction_report(const SpectralDecomposition& decomp,
                                          const UnitaryPath& path, const TimeGrid& grid,
                                          const GaugeTransformation& gauge,
                                          const HolonomyOptions& opts = {});

}  // namespace mixedphase
