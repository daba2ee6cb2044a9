#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixedphase/generators.hpp"
#include "mixedphase/matcore.hpp"
#include "oracles.hpp"

using namespace mixedphase;
using std::numbers::pi;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("hermitian_eig on a diagonal matrix") {
  const EigenSystem e = hermitian_eig(diag2(0.25, 0.75));
  CHECK(e.values(0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(e.values(1) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK((e.vectors - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("hermitian_eig on the tilted spin-1/2 state") {
  const double r = 0.5, th = pi / 3;
  const ComplexMatrix rho =
      0.5 * (ComplexMatrix::Identity(2, 2) + r * (std::sin(th) * pauli(1) + std::cos(th) * pauli(3)));
  const EigenSystem e = hermitian_eig(rho);
  CHECK(std::abs(e.values(0) - 0.25) < 1e-14);
  CHECK(std::abs(e.values(1) - 0.75) < 1e-14);
}

TEST_CASE("hermitian_eig reconstructs random matrices and is deterministic") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = oracle::random_hermitian(4, rng);
    const EigenSystem e = hermitian_eig(h);
    const ComplexMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    CHECK((back - h).norm() < 1e-12);
    CHECK(unitarity_defect(e.vectors) < 1e-12);
    const EigenSystem again = hermitian_eig(h);
    CHECK((again.vectors - e.vectors).norm() == 0.0);
    CHECK((again.values - e.values).norm() == 0.0);
  }
}

TEST_CASE("hermitian_eig fixes a canonical basis inside degenerate clusters") {
  std::mt19937_64 rng(3);
  const ComplexMatrix w = oracle::random_unitary(3, rng);
  ComplexMatrix d = ComplexMatrix::Zero(3, 3);
  d(0, 0) = 0.3;
  d(1, 1) = 0.3;
  d(2, 2) = 0.4;
  const ComplexMatrix h = w * d * w.adjoint();
  const EigenSystem e = hermitian_eig(h);
  for (Eigen::Index k = 0; k < 3; ++k) {
    Eigen::Index big = 0;
    e.vectors.col(k).cwiseAbs().maxCoeff(&big);
    CHECK(std::abs(e.vectors(big, k).imag()) < 1e-14);
    CHECK(e.vectors(big, k).real() > 0.0);
  }
}

TEST_CASE("hermitian_eig rejects bad input") {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(m), Error);
  try {
    hermitian_eig(m);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotHermitian);
  }
  ComplexMatrix n = ComplexMatrix::Identity(2, 2);
  n(0, 0) = std::nan("");
  CHECK_THROWS_AS(hermitian_eig(n), Error);
  CHECK_THROWS_AS(hermitian_eig(ComplexMatrix::Zero(2, 3)), Error);
}

TEST_CASE("exp_skew basic values") {
  CHECK((exp_skew(0.5 * pauli(3), 2 * pi) + ComplexMatrix::Identity(2, 2)).norm() < 1e-14);
  std::mt19937_64 rng(1);
  const ComplexMatrix h = oracle::random_hermitian(3, rng);
  CHECK((exp_skew(h, 0.0) - ComplexMatrix::Identity(3, 3)).norm() == 0.0);
  CHECK((exp_skew(h, 0.7) - oracle::evolve(h, 0.7)).norm() < 1e-12);
}

TEST_CASE("exp_skew matches the closed form of the three-level evolution") {
  const double a = 1.0, b = 1.0, c = std::sqrt(3 * a * a + 4 * b * b);
  const ComplexMatrix x = a * gell_mann(8) + b * gell_mann(4);
  const Complex I(0.0, 1.0);
  for (double t : {0.3, 1.1, 2 * pi / c}) {
    const Complex ph = std::exp(I * a * t / (2 * std::sqrt(3.0)));
    ComplexMatrix u = ComplexMatrix::Zero(3, 3);
    u(0, 0) = ph * (std::cos(c * t / 2) - I * (std::sqrt(3.0) * a / c) * std::sin(c * t / 2));
    u(2, 2) = ph * (std::cos(c * t / 2) + I * (std::sqrt(3.0) * a / c) * std::sin(c * t / 2));
    u(0, 2) = ph * (-2.0 * I * b / c) * std::sin(c * t / 2);
    u(2, 0) = u(0, 2);
    u(1, 1) = std::exp(-I * a * t / std::sqrt(3.0));
    CHECK((exp_skew(x, t) - u).norm() < 1e-13);
  }
}

TEST_CASE("exp_skew stays unitary for large arguments") {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix h = oracle::random_hermitian(3, rng);
    const double t = 1000.0 / h.norm();
    CHECK(unitarity_defect(exp_skew(h, t)) < 1e-12);
  }
}

TEST_CASE("principal_log_unitary") {
  CHECK(principal_log_unitary(ComplexMatrix::Identity(3, 3)).norm() < 1e-15);
  ComplexMatrix w = ComplexMatrix::Zero(2, 2);
  w(0, 0) = std::polar(1.0, 0.4);
  w(1, 1) = std::polar(1.0, -2.9);
  const ComplexMatrix l = principal_log_unitary(w);
  CHECK(std::abs(l(0, 0) - Complex(0, 0.4)) < 1e-14);
  CHECK(std::abs(l(1, 1) - Complex(0, -2.9)) < 1e-14);

  std::mt19937_64 rng(5);
  for (int k = 0; k < 10; ++k) {
    const ComplexMatrix h = oracle::random_hermitian(3, rng);
    const double dt = 1e-3;
    const ComplexMatrix rec = principal_log_unitary(exp_skew(h, dt));
    CHECK((rec - Complex(0.0, -dt) * h).norm() < 1e-10);
  }
  // Round trip for a skew-Hermitian matrix with spectral radius below π.
  const ComplexMatrix h = oracle::random_hermitian(3, rng);
  const double t = 2.5 / hermitian_eig(h).values.cwiseAbs().maxCoeff();
  CHECK((principal_log_unitary(exp_skew(h, t)) - Complex(0.0, -t) * h).norm() < 1e-10);
}

TEST_CASE("principal_log_unitary guards the branch cut and unitarity") {
  ComplexMatrix w = ComplexMatrix::Identity(2, 2);
  w(1, 1) = std::polar(1.0, pi - 1e-8);
  try {
    principal_log_unitary(w);
    FAIL("expected BranchAmbiguity");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::BranchAmbiguity);
  }
  ComplexMatrix nu = ComplexMatrix::Identity(2, 2) * 1.1;
  try {
    principal_log_unitary(nu);
    FAIL("expected NotUnitary");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotUnitary);
  }
}

TEST_CASE("principal_arg conventions") {
  CHECK(principal_arg(Complex(1, 0)) == 0.0);
  CHECK(principal_arg(Complex(-1, 0)) == pi);
  CHECK(principal_arg(Complex(-1, -0.0)) == pi);
  CHECK(principal_arg(Complex(0, -0.5)) == doctest::Approx(-pi / 2));
  CHECK_THROWS_AS(principal_arg(Complex(1e-13, 0)), Error);
}

TEST_CASE("circle distances") {
  CHECK(circle_distance(pi - 1e-3, -pi + 1e-3) == doctest::Approx(2e-3));
  CHECK(half_circle_distance(0.3, 0.3 + pi) < 1e-14);
  CHECK(std::abs(wrap_angle(3 * pi) - pi) < 1e-12);
}

TEST_CASE("polar_unitary returns the nearest unitary") {
  std::mt19937_64 rng(9);
  const ComplexMatrix u = oracle::random_unitary(3, rng);
  CHECK((polar_unitary(u * 2.0) - u).norm() < 1e-12);
  ComplexMatrix one(1, 1);
  one(0, 0) = Complex(0.0, 3.0);
  CHECK(std::abs(polar_unitary(one)(0, 0) - Complex(0.0, 1.0)) < 1e-15);
}
