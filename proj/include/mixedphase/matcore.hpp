#pragma once

// Dense complex matrix kernel: Hermitian eigensystems, unitary exponentials
// and logarithms, and principal-branch phase extraction.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "mixedphase/errors.hpp"

namespace mixedphase {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultHermitianTol = 1e-10;
inline constexpr double kDefaultUnitaryTol = 1e-8;
inline constexpr double kDefaultBranchGuard = 1e-6;
inline constexpr double kDefaultEpsPhase = 1e-12;

struct EigenSystem {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns are eigenvectors
};

/// Throws InvalidMatrix unless `m` is square, non-empty and finite.
void require_square_finite(const ComplexMatrix& m, const char* what);

double frobenius(const ComplexMatrix& m);
/// ‖M − M†‖_F
double hermiticity_defect(const ComplexMatrix& m);
/// ‖M†M − I‖_F
double unitarity_defect(const ComplexMatrix& m);

/// Eigensystem of a Hermitian matrix with deterministic tie-breaking: inside
/// a numerically degenerate cluster the basis is rebuilt by Gram–Schmidt on
/// the projected unit vectors e_0, e_1, ... in index order, and each vector
/// is rephased so that its largest-magnitude component is real positive.
EigenSystem hermitian_eig(const ComplexMatrix& h, double tol = kDefaultHermitianTol);

/// Half-open index ranges [first, last) of ascending `values` whose
/// neighbours differ by at most `gap`.
std::vector<std::pair<Eigen::Index, Eigen::Index>> value_clusters(const RealVector& values,
                                                                  double gap);

/// exp(−i t H) for Hermitian H.
ComplexMatrix exp_skew(const ComplexMatrix& h, double t, double tol = kDefaultHermitianTol);

/// Same as exp_skew but reuses an eigensystem of H.
ComplexMatrix exp_skew(const EigenSystem& eig, double t);

/// Principal logarithm of a unitary matrix: skew-Hermitian L with exp(L) = W
/// and every eigenphase strictly inside (−π + guard, π − guard).
ComplexMatrix principal_log_unitary(const ComplexMatrix& w,
                                    double unitarity_tol = kDefaultUnitaryTol,
                                    double branch_guard = kDefaultBranchGuard);

/// Unitary factor of the polar decomposition M = Q·S.
ComplexMatrix polar_unitary(const ComplexMatrix& m);

/// arg(z) in (−π, π]; UndefinedPhase when |z| ≤ eps_phase.
double principal_arg(Complex z, double eps_phase = kDefaultEpsPhase);

/// Map an angle into (−π, π].
double wrap_angle(double x);

/// Distance on the circle, |principal_arg(e^{i(x−y)})|.
double circle_distance(double x, double y);

/// Distance modulo π, used where only the line through the phase is defined.
double half_circle_distance(double x, double y);

}  // namespace mixedphase
