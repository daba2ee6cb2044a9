#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mixedphase/gauge.hpp"
#include "mixedphase/holonomy.hpp"
#include "mixedphase/lemmas.hpp"
#include "mixedphase/scenarios.hpp"
#include "oracles.hpp"

using namespace mixedphase;
using std::numbers::pi;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidMatrix;
}

SpectralDecomposition random_partitioned(std::mt19937_64& rng) {
  const ComplexMatrix w = oracle::random_unitary(5, rng);
  ComplexMatrix d = ComplexMatrix::Zero(5, 5);
  const double weights[] = {0.3, 0.3, 0.15, 0.15, 0.1};
  for (int k = 0; k < 5; ++k) d(k, k) = weights[k];
  return spectral_decompose(DensityMatrix::validate(w * d * w.adjoint()));
}

}  // namespace

TEST_CASE("identity gauge leaves the path unchanged") {
  const auto su = build_su3(0.3, 1.0, 1.0);
  const auto d = spectral_decompose(su.state);
  const TimeGrid g(su.path.duration(), 32);
  const auto same = apply_gauge(su.path, GaugeTransformation::identity(d.structure), d, g);
  const auto a = sample_path(su.path, g);
  const auto b = sample_path(same, g);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK((a[j] - b[j]).norm() < 1e-14);
}

TEST_CASE("gauged paths keep the density trajectory") {
  std::mt19937_64 rng(40);
  const auto d = random_partitioned(rng);
  const auto path = UnitaryPath::constant(oracle::random_hermitian(5, rng), 1.0);
  const TimeGrid g(1.0, 16);
  const auto gauged = apply_gauge(path, random_gauge(d.structure, 5, 4, 1.0, 1.0), d, g);
  const auto a = sample_path(path, g);
  const auto b = sample_path(gauged, g);
  const ComplexMatrix& rho = d.state.matrix();
  for (std::size_t j = 0; j < a.size(); ++j) {
    const ComplexMatrix ra = a[j] * rho * a[j].adjoint();
    const ComplexMatrix rb = b[j] * rho * b[j].adjoint();
    CHECK((ra - rb).norm() < 1e-10);
  }
}

TEST_CASE("constant lambda1 gauge matches a direct product") {
  const auto su = build_su3(0.3, 1.0, 1.0);
  const auto d = spectral_decompose(su.state);
  const double tau = su.path.duration(), dd = 0.7;
  const TimeGrid g(tau, 16);
  const auto gauged = apply_gauge(su.path, su3_lambda1_gauge(d, dd, tau), d, g);
  const auto s = sample_path(gauged, g);
  for (std::size_t j = 0; j < g.nodes(); ++j) {
    const double t = g.node(j);
    const ComplexMatrix expect = oracle::evolve(1.0 * gell_mann(8) + 1.0 * gell_mann(4), t) *
                                 oracle::evolve(dd * gell_mann(1), t);
    CHECK((s[j] - expect).norm() < 1e-12);
  }
}

TEST_CASE("random_gauge") {
  std::mt19937_64 rng(41);
  const auto d = random_partitioned(rng);
  const auto a = random_gauge(d.structure, 99, 8, 1.0, 2.0);
  const auto b = random_gauge(d.structure, 99, 8, 1.0, 2.0);
  const auto c = random_gauge(d.structure, 100, 8, 1.0, 2.0);
  for (double t : {0.0, 0.3, 1.7, 2.0}) {
    CHECK((a.at(t) - b.at(t)).norm() == 0.0);
    CHECK(unitarity_defect(a.at(t)) < 1e-12);
  }
  CHECK((a.at(1.0) - c.at(1.0)).norm() > 1e-3);
  CHECK((a.at(0.0) - ComplexMatrix::Identity(5, 5)).norm() == 0.0);
  const auto flat = random_gauge(d.structure, 3, 4, 0.0, 2.0);
  CHECK((flat.at(1.3) - ComplexMatrix::Identity(5, 5)).norm() < 1e-15);
  // Block diagonal in the eigenbasis.
  const ComplexMatrix v = a.at(1.1);
  CHECK(v.block(0, 2, 2, 3).norm() == 0.0);
  CHECK(v.block(2, 0, 3, 2).norm() == 0.0);
}

TEST_CASE("composed gauges equal successive application") {
  std::mt19937_64 rng(42);
  const auto d = random_partitioned(rng);
  const auto path = UnitaryPath::constant(oracle::random_hermitian(5, rng), 1.0);
  const TimeGrid g(1.0, 16);
  const auto v = random_gauge(d.structure, 1, 4, 1.0, 1.0);
  const auto w = random_gauge(d.structure, 2, 4, 1.0, 1.0);
  const auto both = sample_path(apply_gauges(path, {&v, &w}, d, g), g);
  const auto twice = sample_path(apply_gauge(apply_gauge(path, v, d, g), w, d, g), g);
  for (std::size_t j = 0; j < both.size(); ++j) CHECK((both[j] - twice[j]).norm() < 1e-12);
}

TEST_CASE("geometric phase is gauge invariant") {
  std::mt19937_64 rng(43);
  const auto d = random_partitioned(rng);
  const auto path = UnitaryPath::constant(oracle::random_hermitian(5, rng), 1.0);
  const TimeGrid g(1.0, 256);
  const auto ident = GaugeTransformation::identity(d.structure);
  const double base = geometric_phase_general(d, apply_gauge(path, ident, d, g), g).gamma_geometric;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto gauged = apply_gauge(path, random_gauge(d.structure, seed, 8, 1.0, 1.0), d, g);
    CHECK(oracle::circle(geometric_phase_general(d, gauged, g).gamma_geometric, base) < 1e-10);
  }
}

TEST_CASE("trace splitting and transformation laws") {
  SUBCASE("identity gauge") {
    const auto su = build_su3(0.3, 1.0, 1.0);
    const auto d = spectral_decompose(su.state);
    const TimeGrid g(su.path.duration(), 128);
    const auto ident = GaugeTransformation::identity(d.structure);
    const auto l1 = verify_lemma_1(d, su.path, ident, g);
    CHECK(l1.pass);
    CHECK(l1.x_law_residual < 1e-12);
    const auto l2 = verify_lemma_2(d, su.path, ident, g);
    CHECK(l2.pass);
    CHECK(l2.residual() < 1e-12);
  }
  SUBCASE("singleton blocks under a diagonal phase gauge") {
    const auto sh = build_spin_half(0.5, pi / 3);
    const auto d = spectral_decompose(sh.state);
    const TimeGrid g(2 * pi, 512);
    const auto v = phase_gauge(d.structure, {0.5, -0.3}, 2 * pi);
    const auto l2 = verify_lemma_2(d, sh.path, v, g);
    CHECK(l2.pass);
    CHECK(l2.singleton_residual < 1e-7);
    CHECK(l2.initial_residual == 0.0);
    CHECK(verify_lemma_1(d, sh.path, v, g).pass);
  }
  SUBCASE("degenerate block under the lambda1 gauge") {
    const auto su = build_su3(0.3, 1.0, 1.0);
    const auto d = spectral_decompose(su.state);
    const TimeGrid g(su.path.duration(), 512);
    const auto v = su3_lambda1_gauge(d, 0.7, su.path.duration());
    const auto l2 = verify_lemma_2(d, su.path, v, g);
    CHECK(l2.pass);
    CHECK(l2.degenerate_residual < 1e-7);
    const auto l1 = verify_lemma_1(d, su.path, v, g);
    CHECK(l1.pass);
    CHECK(l1.trace_split_residual < 1e-10);
  }
  SUBCASE("random five-level state") {
    std::mt19937_64 rng(44);
    const auto d = random_partitioned(rng);
    const auto path = UnitaryPath::constant(oracle::random_hermitian(5, rng), 1.0);
    const TimeGrid g(1.0, 256);
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto v = random_gauge(d.structure, seed, 8, 1.0, 1.0);
      CHECK(verify_lemma_1(d, path, v, g).pass);
      CHECK(verify_lemma_2(d, path, v, g).pass);
    }
  }
}

TEST_CASE("x_block transforms with the gauge at the end point") {
  const auto su = build_su3(0.3, 1.0, 1.0);
  const auto d = spectral_decompose(su.state);
  const double tau = su.path.duration();
  const auto v = su3_lambda1_gauge(d, 0.7, tau);
  const ComplexMatrix u = su.path.end();
  const ComplexMatrix ug = u * d.eigenbasis * v.at(tau) * d.eigenbasis.adjoint();
  for (std::size_t b = 0; b < d.structure.blocks.size(); ++b)
    CHECK((x_block(d, ug, b) - x_block(d, u, b) * v.block_at(b, tau)).norm() < 1e-12);
}

TEST_CASE("gauge structure errors") {
  const auto su = build_su3(0.3, 1.0, 1.0);
  const auto d = spectral_decompose(su.state);
  const auto sh = build_spin_half(0.5, pi / 3);
  const auto d2 = spectral_decompose(sh.state);
  const TimeGrid g(1.0, 8);
  CHECK(kind_of([&] { apply_gauge(su.path, GaugeTransformation::identity(d2.structure), d, g); }) ==
        ErrorKind::StructureMismatch);
  CHECK(kind_of([&] { constant_gauge(d, gell_mann(4), 1.0); }) == ErrorKind::StructureMismatch);
  CHECK(kind_of([&] { phase_gauge(d.structure, {0.1, 0.2}, 1.0); }) == ErrorKind::StructureMismatch);
  CHECK(kind_of([&] { phase_gauge(d2.structure, {0.1}, 1.0); }) == ErrorKind::StructureMismatch);
  CHECK(kind_of([&] {
          GaugeTransformation(d.structure, {BlockGauge::identity(1)});
        }) == ErrorKind::StructureMismatch);
}
