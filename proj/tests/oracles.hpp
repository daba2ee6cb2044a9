#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <complex>
#include <random>

#include "mixedphase/matcore.hpp"

namespace oracle {

using mixedphase::Complex;
using mixedphase::ComplexMatrix;
using mixedphase::ComplexVector;

// Taylor series with scaling and squaring; no eigensolver involved.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.25) {
    scale *= 0.5;
    ++squarings;
  }
  const ComplexMatrix x = a * scale;
  ComplexMatrix term = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

// exp(−i t H)
inline ComplexMatrix evolve(const ComplexMatrix& h, double t) {
  return expm(Complex(0.0, -t) * h);
}

inline ComplexMatrix random_hermitian(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  ComplexMatrix b(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) b(r, c) = Complex(g(rng), g(rng));
  return 0.5 * (b + b.adjoint());
}

inline ComplexVector random_state(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexVector v(n);
  for (Eigen::Index k = 0; k < n; ++k) v(k) = Complex(g(rng), g(rng));
  return v / v.norm();
}

inline ComplexMatrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  return evolve(random_hermitian(n, rng), 1.0);
}

// Pure state under a constant generator: arg⟨ψ|U(τ)|ψ⟩ + τ⟨ψ|H|ψ⟩.
inline double pure_geometric_phase(const ComplexVector& psi, const ComplexMatrix& h, double tau) {
  const Complex overlap = psi.dot(evolve(h, tau) * psi);
  const double energy = psi.dot(h * psi).real();
  return std::remainder(std::arg(overlap) + tau * energy, 2.0 * M_PI);
}

inline double circle(double x, double y) { return std::abs(std::remainder(x - y, 2.0 * M_PI)); }

}  // namespace oracle
