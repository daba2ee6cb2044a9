#pragma once

// Two worked examples: a spin-½ mixed state precessing about z, and a
// three-level state with a doubly degenerate eigenvalue driven by aλ8 + bλ4.

#include <string>
#include <vector>

#include "mixedphase/gauge.hpp"
#include "mixedphase/generators.hpp"
#include "mixedphase/paths.hpp"
#include "mixedphase/statespace.hpp"

namespace mixedphase {

struct SpinHalfScenario {
  double r;
  double theta;
  double solid_angle;  // Ω = 2π(1 − cos θ)
  DensityMatrix state;
  UnitaryPath path;    // exp(−i t σ3/2), τ = 2π
};

/// ρ0 = ½(I + r(sin θ σ1 + cos θ σ3)); 0 < r ≤ 1, 0 ≤ θ ≤ π.
SpinHalfScenario build_spin_half(double r, double theta);

struct SpinHalfClosedForm {
  double gamma_bracket;  // arg[−(1+r)/2 e^{iπcosθ} − (1−r)/2 e^{−iπcosθ}]
  double gamma_arctan;   // −arctan(r tan(Ω/2)); equal to the above only mod π
};

SpinHalfClosedForm spin_half_closed_form(double r, double theta,
                                         double eps_phase = kDefaultEpsPhase);

struct SU3Scenario {
  double omega;
  double a;
  double b;
  double c;         // √(3a² + 4b²)
  DensityMatrix state;  // diag(ω, ω, 1 − 2ω)
  UnitaryPath path;     // exp(−i t (aλ8 + bλ4)), τ = 2π/c
};

/// 0 < ω < ½, ω ≠ 1/3, a ≠ 0.
SU3Scenario build_su3(double omega, double a, double b);

/// Closed form of arg Tr(ρ0 U(τ) F(τ)) for the SU(3) example:
/// arg[ω(1 − e^{iψ}) − (1 − 2ω) e^{−iψ}], ψ = √3πa/c.
double su3_closed_reduction(double omega, double a, double b);

/// Same example with the full-space P-exp projected onto the degenerate
/// block: arg[2ω − (1 − 2ω) e^{−iψ}].
double su3_literal_reduction(double omega, double a, double b);

/// The printed arctan expression with k = √3a/c and φ = (π − 2c)/(c√3).
/// Comparison only.
double su3_paper_closed_form(double omega, double a, double b);

/// V(t) = exp(−i d λ1 t), acting inside the degenerate block.
GaugeTransformation su3_lambda1_gauge(const SpectralDecomposition& decomp, double d,
                                      double duration);

struct ScenarioInfo {
  std::string name;
  std::vector<std::string> parameters;
  std::string description;
};

std::vector<ScenarioInfo> scenario_catalog();

}  // namespace mixedphase
