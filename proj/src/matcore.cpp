#include "mixedphase/matcore.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace mixedphase {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidMatrix: return "InvalidMatrix";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::NotPositive: return "NotPositive";
    case ErrorKind::TraceNotOne: return "TraceNotOne";
    case ErrorKind::NotUnitary: return "NotUnitary";
    case ErrorKind::BranchAmbiguity: return "BranchAmbiguity";
    case ErrorKind::UndefinedPhase: return "UndefinedPhase";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::InvalidPath: return "InvalidPath";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::StructureMismatch: return "StructureMismatch";
    case ErrorKind::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::NonRealAccumulation: return "NonRealAccumulation";
  }
  return "Unknown";
}

namespace {

// Relative width of a numerically degenerate eigenvalue cluster.
constexpr double kClusterRelTol = 1e-13;

void fix_phase(Eigen::Ref<ComplexVector> v) {
  Eigen::Index best = 0;
  double best_mag = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    // First index wins among near-equal magnitudes.
    const double mag = std::abs(v(i));
    if (mag > best_mag * (1.0 + 1e-10)) {
      best = i;
      best_mag = mag;
    }
  }
  if (best_mag <= 0.0) return;
  const Complex phase = std::conj(v(best)) / best_mag;
  v *= phase;
  v(best) = Complex(std::abs(v(best)), 0.0);
}

// Orthonormal basis of span(cols) built from the projections of e_0, e_1, ...
ComplexMatrix canonical_basis(const ComplexMatrix& cols) {
  const Eigen::Index n = cols.rows();
  const Eigen::Index m = cols.cols();
  ComplexMatrix out(n, m);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < n && found < m; ++i) {
    ComplexVector v = cols * cols.row(i).adjoint();  // P e_i
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index k = 0; k < found; ++k) {
        v -= out.col(k) * out.col(k).dot(v);
      }
    }
    const double norm = v.norm();
    if (norm < 1e-6) continue;
    out.col(found++) = v / norm;
  }
  if (found < m) {
    // Cannot happen for an orthonormal input; keep the solver's basis.
    return cols;
  }
  return out;
}

}  // namespace

void require_square_finite(const ComplexMatrix& m, const char* what) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw Error(ErrorKind::InvalidMatrix, std::string(what) + " must be a non-empty square matrix");
  }
  if (!m.allFinite()) {
    throw Error(ErrorKind::InvalidMatrix, std::string(what) + " has non-finite entries");
  }
}

double frobenius(const ComplexMatrix& m) { return m.norm(); }

double hermiticity_defect(const ComplexMatrix& m) { return (m - m.adjoint()).norm(); }

double unitarity_defect(const ComplexMatrix& m) {
  return (m.adjoint() * m - ComplexMatrix::Identity(m.rows(), m.cols())).norm();
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> value_clusters(const RealVector& values,
                                                                  double gap) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> out;
  Eigen::Index first = 0;
  for (Eigen::Index i = 1; i <= values.size(); ++i) {
    if (i == values.size() || std::abs(values(i) - values(i - 1)) > gap) {
      out.emplace_back(first, i);
      first = i;
    }
  }
  return out;
}

EigenSystem hermitian_eig(const ComplexMatrix& h, double tol) {
  require_square_finite(h, "Hermitian input");
  const double scale = std::max(1.0, h.norm());
  const double defect = hermiticity_defect(h);
  if (defect > tol * scale) {
    throw Error(ErrorKind::NotHermitian,
                "‖H − H†‖_F = " + std::to_string(defect) + " exceeds tolerance");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidMatrix, "Hermitian eigensolver did not converge");
  }
  EigenSystem out{solver.eigenvalues(), solver.eigenvectors()};
  for (const auto& [first, last] : value_clusters(out.values, kClusterRelTol * scale)) {
    const Eigen::Index width = last - first;
    if (width > 1) {
      out.vectors.middleCols(first, width) = canonical_basis(out.vectors.middleCols(first, width));
    }
    for (Eigen::Index k = first; k < last; ++k) fix_phase(out.vectors.col(k));
  }
  return out;
}

ComplexMatrix exp_skew(const EigenSystem& eig, double t) {
  const Eigen::Index n = eig.vectors.rows();
  if (t == 0.0) return ComplexMatrix::Identity(n, n);
  ComplexVector phases(eig.values.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) {
    phases(k) = std::polar(1.0, -t * eig.values(k));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

ComplexMatrix exp_skew(const ComplexMatrix& h, double t, double tol) {
  require_square_finite(h, "generator");
  if (t == 0.0) {
    if (hermiticity_defect(h) > tol * std::max(1.0, h.norm())) {
      throw Error(ErrorKind::NotHermitian, "generator is not Hermitian");
    }
    return ComplexMatrix::Identity(h.rows(), h.cols());
  }
  return exp_skew(hermitian_eig(h, tol), t);
}

ComplexMatrix principal_log_unitary(const ComplexMatrix& w, double unitarity_tol,
                                    double branch_guard) {
  require_square_finite(w, "unitary input");
  const double defect = unitarity_defect(w);
  if (defect > unitarity_tol) {
    throw Error(ErrorKind::NotUnitary, "‖W†W − I‖_F = " + std::to_string(defect));
  }
  Eigen::ComplexSchur<ComplexMatrix> schur(w);
  if (schur.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidMatrix, "Schur decomposition did not converge");
  }
  const ComplexMatrix& q = schur.matrixU();
  const ComplexMatrix& t = schur.matrixT();
  ComplexVector logs(t.rows());
  for (Eigen::Index k = 0; k < t.rows(); ++k) {
    const double phase = std::arg(t(k, k));
    if (std::numbers::pi - std::abs(phase) < branch_guard) {
      throw Error(ErrorKind::BranchAmbiguity,
                  "eigenphase " + std::to_string(phase) +
                      " is within the branch guard of ±π; refine the time grid");
    }
    logs(k) = Complex(0.0, phase);
  }
  const ComplexMatrix l = q * logs.asDiagonal() * q.adjoint();
  return 0.5 * (l - l.adjoint());
}

ComplexMatrix polar_unitary(const ComplexMatrix& m) {
  if (m.rows() == 1 && m.cols() == 1) {
    const double mag = std::abs(m(0, 0));
    ComplexMatrix out(1, 1);
    out(0, 0) = mag > 0.0 ? m(0, 0) / mag : Complex(1.0, 0.0);
    return out;
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(x, two_pi);  // in [−π, π]
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

double principal_arg(Complex z, double eps_phase) {
  const double mag = std::abs(z);
  if (!(mag > eps_phase)) {
    throw Error(ErrorKind::UndefinedPhase,
                "|z| = " + std::to_string(mag) + " ≤ eps_phase; the phase is undefined");
  }
  const double phase = std::arg(z);
  return phase <= -std::numbers::pi ? std::numbers::pi : phase;
}

double circle_distance(double x, double y) { return std::abs(wrap_angle(x - y)); }

double half_circle_distance(double x, double y) {
  return 0.5 * std::abs(wrap_angle(2.0 * (x - y)));
}

}  // namespace mixedphase
