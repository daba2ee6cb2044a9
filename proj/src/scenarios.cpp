#include "mixedphase/scenarios.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mixedphase {

using std::numbers::pi;

ComplexMatrix pauli(int i) {
  ComplexMatrix s = ComplexMatrix::Zero(2, 2);
  switch (i) {
    case 1:
      s(0, 1) = 1.0;
      s(1, 0) = 1.0;
      break;
    case 2:
      s(0, 1) = Complex(0.0, -1.0);
      s(1, 0) = Complex(0.0, 1.0);
      break;
    case 3:
      s(0, 0) = 1.0;
      s(1, 1) = -1.0;
      break;
    default:
      throw Error(ErrorKind::IndexOutOfRange, "Pauli index " + std::to_string(i) + " not in 1..3");
  }
  return s;
}

ComplexMatrix gell_mann(int i) {
  ComplexMatrix l = ComplexMatrix::Zero(3, 3);
  const Complex I(0.0, 1.0);
  switch (i) {
    case 1: l(0, 1) = 1.0; l(1, 0) = 1.0; break;
    case 2: l(0, 1) = -I; l(1, 0) = I; break;
    case 3: l(0, 0) = 1.0; l(1, 1) = -1.0; break;
    case 4: l(0, 2) = 1.0; l(2, 0) = 1.0; break;
    case 5: l(0, 2) = -I; l(2, 0) = I; break;
    case 6: l(1, 2) = 1.0; l(2, 1) = 1.0; break;
    case 7: l(1, 2) = -I; l(2, 1) = I; break;
    case 8: {
      const double s = 1.0 / std::sqrt(3.0);
      l(0, 0) = s;
      l(1, 1) = s;
      l(2, 2) = -2.0 * s;
      break;
    }
    default:
      throw Error(ErrorKind::IndexOutOfRange,
                  "Gell-Mann index " + std::to_string(i) + " not in 1..8");
  }
  return l;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::ParameterOutOfRange, what);
}

void check_spin_half(double r, double theta) {
  require(std::isfinite(r) && r > 0.0 && r <= 1.0, "spin-half: r must lie in (0, 1]");
  require(std::isfinite(theta) && theta >= 0.0 && theta <= pi,
          "spin-half: theta must lie in [0, pi]");
}

void check_su3(double omega, double a, double b) {
  require(std::isfinite(omega) && omega > 0.0 && omega < 0.5,
          "su3: omega must lie in (0, 1/2)");
  require(std::abs(omega - 1.0 / 3.0) > 1e-9,
          "su3: omega = 1/3 merges all three eigenvalues into one block");
  require(std::isfinite(a) && a != 0.0, "su3: a must be nonzero");
  require(std::isfinite(b), "su3: b must be finite");
}

double su3_c(double a, double b) { return std::sqrt(3.0 * a * a + 4.0 * b * b); }

}  // namespace

SpinHalfScenario build_spin_half(double r, double theta) {
  check_spin_half(r, theta);
  const ComplexMatrix rho =
      0.5 * (ComplexMatrix::Identity(2, 2) +
             r * (std::sin(theta) * pauli(1) + std::cos(theta) * pauli(3)));
  return {r, theta, 2.0 * pi * (1.0 - std::cos(theta)), DensityMatrix::validate(rho),
          UnitaryPath::constant(0.5 * pauli(3), 2.0 * pi)};
}

SpinHalfClosedForm spin_half_closed_form(double r, double theta, double eps_phase) {
  check_spin_half(r, theta);
  const double p = pi * std::cos(theta);
  const Complex bracket = -0.5 * (1.0 + r) * std::polar(1.0, p) - 0.5 * (1.0 - r) * std::polar(1.0, -p);
  const double solid = 2.0 * pi * (1.0 - std::cos(theta));
  return {principal_arg(bracket, eps_phase), -std::atan(r * std::tan(0.5 * solid))};
}

SU3Scenario build_su3(double omega, double a, double b) {
  check_su3(omega, a, b);
  const double c = su3_c(a, b);
  ComplexMatrix rho = ComplexMatrix::Zero(3, 3);
  rho(0, 0) = omega;
  rho(1, 1) = omega;
  rho(2, 2) = 1.0 - 2.0 * omega;
  const ComplexMatrix x = a * gell_mann(8) + b * gell_mann(4);
  return {omega, a, b, c, DensityMatrix::validate(rho),
          UnitaryPath::constant(x, 2.0 * pi / c)};
}

double su3_closed_reduction(double omega, double a, double b) {
  check_su3(omega, a, b);
  const double psi = std::sqrt(3.0) * pi * a / su3_c(a, b);
  const Complex z = omega * (1.0 - std::polar(1.0, psi)) - (1.0 - 2.0 * omega) * std::polar(1.0, -psi);
  return principal_arg(z);
}

double su3_literal_reduction(double omega, double a, double b) {
  check_su3(omega, a, b);
  const double psi = std::sqrt(3.0) * pi * a / su3_c(a, b);
  return principal_arg(2.0 * omega - (1.0 - 2.0 * omega) * std::polar(1.0, -psi));
}

double su3_paper_closed_form(double omega, double a, double b) {
  check_su3(omega, a, b);
  const double c = su3_c(a, b);
  const double k = std::sqrt(3.0) * a / c;
  const double phi = (pi - 2.0 * c) / (c * std::sqrt(3.0));
  const double t = std::tan(phi);
  const double num = std::sin(std::atan(t / k));
  const double den = 2.0 * omega / (2.0 * omega - 1.0) + std::cos(std::atan(k * t));
  return std::atan(num / den);
}

GaugeTransformation su3_lambda1_gauge(const SpectralDecomposition& decomp, double d,
                                      double duration) {
  return constant_gauge(decomp, d * gell_mann(1), duration);
}

std::vector<ScenarioInfo> scenario_catalog() {
  return {
      {"spin-half", {"r", "theta"},
       "spin-1/2 mixed state with Bloch vector (r, theta) precessing under sigma3/2 for tau = 2pi"},
      {"su3", {"omega", "a", "b", "gauge_d"},
       "rho = diag(omega, omega, 1-2omega) under a*lambda8 + b*lambda4 for tau = 2pi/c; "
       "gauge_d applies exp(-i d lambda1 t)"},
  };
}

}  // namespace mixedphase
