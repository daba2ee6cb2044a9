#pragma once

// Unitary evolutions U(t) with U(0) = I, their evaluation on uniform grids,
// the connection A(t) = U†(t) U̇(t), and block-restricted product integration.

#include <cstddef>
#include <variant>
#include <vector>

#include "mixedphase/matcore.hpp"
#include "mixedphase/statespace.hpp"

namespace mixedphase {

inline constexpr std::size_t kDefaultSteps = 4096;

class TimeGrid {
 public:
  TimeGrid(double duration, std::size_t steps);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t nodes() const noexcept { return steps_ + 1; }
  double duration() const noexcept { return duration_; }
  double dt() const noexcept { return duration_ / static_cast<double>(steps_); }
  double node(std::size_t j) const;
  double midpoint(std::size_t j) const { return (static_cast<double>(j) + 0.5) * dt(); }

 private:
  double duration_;
  std::size_t steps_;
};

struct ConstantGenerator {
  ComplexMatrix generator;
};

struct GeneratorSegment {
  ComplexMatrix generator;
  double duration = 0.0;
};

struct PiecewiseConstant {
  std::vector<GeneratorSegment> segments;
};

struct Sampled {
  std::vector<double> times;
  std::vector<ComplexMatrix> unitaries;
};

/// U(t) on [0, τ]. Generator forms evolve as exp(−iHt); sampled paths carry
/// their own nodes, which must form a uniform grid starting at U(0) = I.
class UnitaryPath {
 public:
  using Representation = std::variant<ConstantGenerator, PiecewiseConstant, Sampled>;

  static UnitaryPath constant(const ComplexMatrix& generator, double duration);
  static UnitaryPath piecewise(std::vector<GeneratorSegment> segments);
  static UnitaryPath sampled(std::vector<double> times, std::vector<ComplexMatrix> unitaries);

  Eigen::Index dim() const noexcept { return dim_; }
  double duration() const noexcept { return duration_; }
  const Representation& representation() const noexcept { return rep_; }
  bool is_sampled() const noexcept { return std::holds_alternative<Sampled>(rep_); }

  /// U(t). Sampled paths can only be evaluated at their nodes.
  ComplexMatrix evaluate(double t) const;

  /// U(τ).
  ComplexMatrix end() const { return evaluate(duration_); }

 private:
  UnitaryPath(Representation rep, Eigen::Index dim, double duration);

  Representation rep_;
  Eigen::Index dim_;
  double duration_;
  // Cached eigensystems of the generators, one per segment.
  std::vector<EigenSystem> eig_;
  std::vector<ComplexMatrix> prefix_;  // U at each segment start
};

/// U_0 .. U_M on the grid; U_0 = I exactly.
std::vector<ComplexMatrix> sample_path(const UnitaryPath& path, const TimeGrid& grid);

/// Grid that exactly matches a sampled path's nodes, or M uniform steps.
TimeGrid natural_grid(const UnitaryPath& path, std::size_t steps = kDefaultSteps);

struct ConnectionSample {
  std::vector<double> midpoints;
  std::vector<ComplexMatrix> values;  // skew-Hermitian A_{j+1/2}
};

/// Connection at cell midpoints. Exact (−iH) inside generator segments;
/// principal_log_unitary(U_j† U_{j+1}) / Δt for sampled paths and for the
/// cells that straddle a segment boundary.
ConnectionSample connection(const UnitaryPath& path, const TimeGrid& grid);

/// Path-ordered exponential of the connection restricted to the span of
/// `frame`'s orthonormal columns: α(t_0) = I and
/// α(t_{j+1}) = exp(−Ã_{j+1/2} Δt) α(t_j), Ã = frame† A frame.
std::vector<ComplexMatrix> path_ordered_block_exp(const ConnectionSample& conn,
                                                  const ComplexMatrix& frame,
                                                  const TimeGrid& grid);

/// Same with the block given as indices of the computational basis.
std::vector<ComplexMatrix> path_ordered_block_exp(const ConnectionSample& conn,
                                                  const std::vector<Eigen::Index>& block,
                                                  const TimeGrid& grid);

/// Discrete parallel transport from sampled unitaries: α(t_{j+1}) =
/// polar(frame† U_{j+1}† U_j frame) α(t_j). Each link transforms as
/// V_{j+1}† T_j V_j under U → U V, which makes the result exactly gauge
/// covariant on the grid.
std::vector<ComplexMatrix> block_transport(const std::vector<ComplexMatrix>& samples,
                                           const ComplexMatrix& frame);

struct CyclicityResult {
  bool cyclic = false;
  double residual = 0.0;  // ‖ρ(τ) − ρ(0)‖_F
};

CyclicityResult cyclicity_check(const DensityMatrix& rho0, const UnitaryPath& path,
                                double tol = 1e-9);

/// Same as cyclicity_check but for the path truncated at time t.
CyclicityResult cyclicity_check_at(const DensityMatrix& rho0, const UnitaryPath& path, double t,
                                   double tol = 1e-9);

}  // namespace mixedphase
