#include "mixedphase/holonomy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mixedphase {

HolonomyFunctional::HolonomyFunctional(DegeneracyStructure structure,
                                       std::vector<std::vector<ComplexMatrix>> trajectories)
    : structure_(std::move(structure)), trajectories_(std::move(trajectories)), nodes_(0) {
  if (trajectories_.size() != structure_.blocks.size() || trajectories_.empty()) {
    throw Error(ErrorKind::StructureMismatch, "one trajectory per block is required");
  }
  nodes_ = trajectories_.front().size();
  for (std::size_t b = 0; b < trajectories_.size(); ++b) {
    if (trajectories_[b].size() != nodes_ || nodes_ == 0) {
      throw Error(ErrorKind::StructureMismatch, "block trajectories differ in length");
    }
  }
}

HolonomyFunctional HolonomyFunctional::identity(const DegeneracyStructure& structure,
                                                std::size_t nodes) {
  std::vector<std::vector<ComplexMatrix>> traj;
  for (const auto& b : structure.blocks) {
    traj.emplace_back(nodes, ComplexMatrix::Identity(b.multiplicity, b.multiplicity));
  }
  return HolonomyFunctional(structure, std::move(traj));
}

ComplexMatrix HolonomyFunctional::assembled(std::size_t node) const {
  const Eigen::Index n = structure_.dim();
  ComplexMatrix f = ComplexMatrix::Zero(n, n);
  for (std::size_t b = 0; b < trajectories_.size(); ++b) {
    const Block& blk = structure_.blocks[b];
    f.block(blk.offset, blk.offset, blk.multiplicity, blk.multiplicity) = trajectories_[b].at(node);
  }
  return f;
}

double HolonomyFunctional::max_unitarity_defect() const {
  double worst = 0.0;
  for (const auto& traj : trajectories_) {
    for (const auto& m : traj) worst = std::max(worst, unitarity_defect(m));
  }
  return worst;
}

PhaseValue total_phase(const DensityMatrix& rho0, const ComplexMatrix& u_end, double eps_phase) {
  const Complex z = (u_end * rho0.matrix()).trace();
  return {principal_arg(z, eps_phase), std::abs(z)};
}

namespace {

double dynamical_from_connection(const DensityMatrix& rho0, const ConnectionSample& conn,
                                 double dt, double real_tol) {
  Complex sum(0.0, 0.0);
  for (const auto& a : conn.values) sum += (rho0.matrix() * a).trace();
  sum *= dt;
  // −i·(x + iy) = y − ix
  const double value = sum.imag();
  if (std::abs(sum.real()) > real_tol * std::max(1.0, std::abs(value))) {
    throw Error(ErrorKind::NonRealAccumulation,
                "dynamical phase has imaginary residue " + std::to_string(-sum.real()));
  }
  return value;
}

HolonomyFunctional restricted_functional(const SpectralDecomposition& decomp,
                                         const UnitaryPath& path, const TimeGrid& grid,
                                         const ConnectionSample* conn,
                                         const std::vector<ComplexMatrix>* samples) {
  std::vector<std::vector<ComplexMatrix>> traj;
  traj.reserve(decomp.structure.blocks.size());
  for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
    const ComplexMatrix frame = decomp.block_frame(b);
    if (path.is_sampled()) {
      traj.push_back(block_transport(*samples, frame));
    } else {
      traj.push_back(path_ordered_block_exp(*conn, frame, grid));
    }
  }
  return HolonomyFunctional(decomp.structure, std::move(traj));
}

void require_dims(const SpectralDecomposition& decomp, const UnitaryPath& path) {
  if (decomp.eigenbasis.rows() != path.dim()) {
    throw Error(ErrorKind::StructureMismatch, "state and path dimensions differ");
  }
}

// Everything a phase report needs, computed once per (path, grid).
struct Evaluation {
  std::vector<ComplexMatrix> samples;
  ConnectionSample conn;
  HolonomyFunctional f;
};

Evaluation evaluate(const SpectralDecomposition& decomp, const UnitaryPath& path,
                    const TimeGrid& grid) {
  require_dims(decomp, path);
  std::vector<ComplexMatrix> samples;
  if (path.is_sampled()) samples = sample_path(path, grid);
  ConnectionSample conn = connection(path, grid);
  HolonomyFunctional f = restricted_functional(decomp, path, grid, &conn, &samples);
  return {std::move(samples), std::move(conn), std::move(f)};
}

double transport_residual_impl(const SpectralDecomposition& decomp, const ConnectionSample& conn,
                               const HolonomyFunctional& f, double dt) {
  if (f.nodes() != conn.values.size() + 1) {
    throw Error(ErrorKind::GridMismatch, "F trajectory does not match the grid");
  }
  double worst = 0.0;
  for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
    const ComplexMatrix frame = decomp.block_frame(b);
    for (std::size_t j = 0; j < conn.values.size(); ++j) {
      const ComplexMatrix a = frame.adjoint() * conn.values[j] * frame;
      const ComplexMatrix& f0 = f.block(b, j);
      const ComplexMatrix& f1 = f.block(b, j + 1);
      const ComplexMatrix mid = 0.5 * (f0 + f1);
      const ComplexMatrix r = mid.adjoint() * (a * mid + (f1 - f0) / dt);
      worst = std::max(worst, r.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

Complex geometric_trace(const SpectralDecomposition& decomp, const ComplexMatrix& u_end,
                        const ComplexMatrix& f_end_eigen) {
  const ComplexMatrix& e = decomp.eigenbasis;
  return (decomp.state.matrix() * u_end * e * f_end_eigen * e.adjoint()).trace();
}

PhaseReport build_report(const SpectralDecomposition& decomp, const UnitaryPath& path,
                         const TimeGrid& grid, const HolonomyOptions& opts, bool diagonal_form) {
  const Evaluation ev = evaluate(decomp, path, grid);
  const DensityMatrix& rho0 = decomp.state;
  const ComplexMatrix u_end = path.end();

  PhaseReport rep;
  const Complex zt = (u_end * rho0.matrix()).trace();
  rep.visibility_total = std::abs(zt);
  if (rep.visibility_total > opts.eps_phase) rep.gamma_total = principal_arg(zt, opts.eps_phase);
  rep.gamma_dynamical = dynamical_from_connection(rho0, ev.conn, grid.dt(), opts.real_tol);

  Complex zg;
  if (diagonal_form) {
    // Σ_k ω_k ⟨k|U(τ)|k⟩ F_kk(τ)
    zg = Complex(0.0, 0.0);
    for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
      const Eigen::Index k = decomp.structure.blocks[b].offset;
      const ComplexVector ket = decomp.eigenbasis.col(k);
      zg += decomp.eigenvalues(k) * ket.dot(u_end * ket) * ev.f.block_end(b)(0, 0);
    }
  } else {
    zg = geometric_trace(decomp, u_end, ev.f.end());
  }
  rep.visibility_geometric = std::abs(zg);
  rep.gamma_geometric = principal_arg(zg, opts.eps_phase);
  if (rep.gamma_total) rep.naive_subtraction = *rep.gamma_total - rep.gamma_dynamical;

  const CyclicityResult cyc = cyclicity_check(rho0, path, opts.cyclic_tol);
  rep.cyclic = cyc.cyclic;
  rep.cyclicity_residual = cyc.residual;
  rep.transport_residual = transport_residual_impl(decomp, ev.conn, ev.f, grid.dt());
  for (const auto& a : ev.conn.values) {
    rep.weak_transport_residual =
        std::max(rep.weak_transport_residual, std::abs((rho0.matrix() * a).trace()));
  }

  if (opts.convergence_estimate && grid.steps() % 2 == 0 && grid.steps() >= 4) {
    const TimeGrid half(grid.duration(), grid.steps() / 2);
    std::vector<ComplexMatrix> samples;
    if (path.is_sampled()) samples = sample_path(path, half);
    ConnectionSample conn;
    if (!path.is_sampled()) conn = connection(path, half);
    const HolonomyFunctional f_half = restricted_functional(decomp, path, half, &conn, &samples);
    const Complex zh = geometric_trace(decomp, u_end, f_half.end());
    if (std::abs(zh) > opts.eps_phase) {
      rep.convergence_estimate = circle_distance(rep.gamma_geometric, std::arg(zh));
    }
  }
  return rep;
}

}  // namespace

double dynamical_phase(const DensityMatrix& rho0, const UnitaryPath& path, const TimeGrid& grid,
                       double real_tol) {
  if (rho0.dim() != path.dim()) {
    throw Error(ErrorKind::StructureMismatch, "state and path dimensions differ");
  }
  return dynamical_from_connection(rho0, connection(path, grid), grid.dt(), real_tol);
}

HolonomyFunctional f_functional(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                const TimeGrid& grid) {
  require_dims(decomp, path);
  std::vector<ComplexMatrix> samples;
  ConnectionSample conn;
  if (path.is_sampled()) {
    samples = sample_path(path, grid);
  } else {
    conn = connection(path, grid);
  }
  return restricted_functional(decomp, path, grid, &conn, &samples);
}

HolonomyFunctional f_functional_literal(const SpectralDecomposition& decomp,
                                        const UnitaryPath& path, const TimeGrid& grid) {
  require_dims(decomp, path);
  const Eigen::Index n = path.dim();
  const ComplexMatrix full = ComplexMatrix::Identity(n, n);
  std::vector<ComplexMatrix> samples;
  ConnectionSample conn;
  std::vector<ComplexMatrix> pexp;
  if (path.is_sampled()) {
    samples = sample_path(path, grid);
    pexp = block_transport(samples, full);
  } else {
    conn = connection(path, grid);
    pexp = path_ordered_block_exp(conn, full, grid);
  }
  const HolonomyFunctional restricted =
      restricted_functional(decomp, path, grid, &conn, &samples);

  std::vector<std::vector<ComplexMatrix>> traj;
  for (std::size_t b = 0; b < decomp.structure.blocks.size(); ++b) {
    if (decomp.structure.blocks[b].multiplicity == 1) {
      std::vector<ComplexMatrix> t;
      for (std::size_t j = 0; j < restricted.nodes(); ++j) t.push_back(restricted.block(b, j));
      traj.push_back(std::move(t));
      continue;
    }
    const ComplexMatrix frame = decomp.block_frame(b);
    std::vector<ComplexMatrix> t;
    t.reserve(pexp.size());
    for (const auto& p : pexp) t.push_back(frame.adjoint() * p * frame);
    traj.push_back(std::move(t));
  }
  return HolonomyFunctional(decomp.structure, std::move(traj));
}

PhaseReport geometric_phase_nondegenerate(const SpectralDecomposition& decomp,
                                          const UnitaryPath& path, const TimeGrid& grid,
                                          const HolonomyOptions& opts) {
  if (!decomp.structure.all_singletons()) {
    throw Error(ErrorKind::DegenerateInput,
                "ρ(0) has a degenerate eigenvalue; use geometric_phase_general");
  }
  return build_report(decomp, path, grid, opts, true);
}

PhaseReport geometric_phase_general(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                    const TimeGrid& grid, const HolonomyOptions& opts) {
  return build_report(decomp, path, grid, opts, false);
}

double geometric_phase_literal(const SpectralDecomposition& decomp, const UnitaryPath& path,
                               const TimeGrid& grid, double eps_phase) {
  const HolonomyFunctional f = f_functional_literal(decomp, path, grid);
  return principal_arg(geometric_trace(decomp, path.end(), f.end()), eps_phase);
}

double parallel_transport_residual(const SpectralDecomposition& decomp, const UnitaryPath& path,
                                   const HolonomyFunctional& f, const TimeGrid& grid) {
  require_dims(decomp, path);
  return transport_residual_impl(decomp, connection(path, grid), f, grid.dt());
}

double weak_transport_residual(const DensityMatrix& rho0, const UnitaryPath& path,
                               const TimeGrid& grid) {
  double worst = 0.0;
  for (const auto& a : connection(path, grid).values) {
    worst = std::max(worst, std::abs((rho0.matrix() * a).trace()));
  }
  return worst;
}

std::vector<IntensitySample> interference_profile(const DensityMatrix& rho0,
                                                  const ComplexMatrix& u_end,
                                                  const std::vector<double>& chi,
                                                  double eps_phase) {
  const Complex z = (u_end * rho0.matrix()).trace();
  const double nu = std::abs(z);
  const double phase = nu > eps_phase ? principal_arg(z, eps_phase) : 0.0;
  std::vector<IntensitySample> out;
  out.reserve(chi.size());
  for (double x : chi) {
    out.push_back({x, nu > eps_phase ? 1.0 + nu * std::cos(x - phase) : 1.0});
  }
  return out;
}

NaiveSubtraction naive_subtraction_report(const SpectralDecomposition& decomp,
                                          const UnitaryPath& path, const TimeGrid& grid,
                                          const GaugeTransformation& gauge,
                                          const HolonomyOptions& opts) {
  HolonomyOptions o = opts;
  o.convergence_estimate = false;
  const UnitaryPath base =
      apply_gauge(path, GaugeTransformation::identity(decomp.structure), decomp, grid);
  const UnitaryPath gauged = apply_gauge(path, gauge, decomp, grid);
  const PhaseReport r0 = geometric_phase_general(decomp, base, grid, o);
  const PhaseReport r1 = geometric_phase_general(decomp, gauged, grid, o);
  if (!r0.naive_subtraction || !r1.naive_subtraction) {
    throw Error(ErrorKind::UndefinedPhase, "total phase undefined; naive subtraction not available");
  }
  return {circle_distance(*r1.naive_subtraction, *r0.naive_subtraction),
          circle_distance(r1.gamma_geometric, r0.gamma_geometric)};
}

}  // namespace mixedphase
