#include "mixedphase/paths.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

namespace mixedphase {

namespace {

constexpr double kTimeRelTol = 1e-9;

void require_generator(const ComplexMatrix& h, const char* what) {
  require_square_finite(h, what);
  if (hermiticity_defect(h) > kDefaultHermitianTol * std::max(1.0, h.norm())) {
    throw Error(ErrorKind::NotHermitian, std::string(what) + " is not Hermitian");
  }
}

ComplexMatrix minus_i(const ComplexMatrix& h) { return Complex(0.0, -1.0) * h; }

}  // namespace

TimeGrid::TimeGrid(double duration, std::size_t steps) : duration_(duration), steps_(steps) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorKind::GridMismatch, "grid duration must be positive and finite");
  }
  if (steps < 2) throw Error(ErrorKind::GridMismatch, "grid needs at least 2 steps");
}

double TimeGrid::node(std::size_t j) const {
  if (j > steps_) throw Error(ErrorKind::IndexOutOfRange, "grid node index out of range");
  // Endpoint exactly τ so that the last sample is U(τ).
  return j == steps_ ? duration_ : static_cast<double>(j) * dt();
}

UnitaryPath::UnitaryPath(Representation rep, Eigen::Index dim, double duration)
    : rep_(std::move(rep)), dim_(dim), duration_(duration) {}

UnitaryPath UnitaryPath::constant(const ComplexMatrix& generator, double duration) {
  require_generator(generator, "path generator");
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw Error(ErrorKind::InvalidPath, "path duration must be positive");
  }
  UnitaryPath p(ConstantGenerator{generator}, generator.rows(), duration);
  p.eig_.push_back(hermitian_eig(generator));
  p.prefix_.push_back(ComplexMatrix::Identity(generator.rows(), generator.rows()));
  return p;
}

UnitaryPath UnitaryPath::piecewise(std::vector<GeneratorSegment> segments) {
  if (segments.empty()) throw Error(ErrorKind::InvalidPath, "piecewise path has no segments");
  const Eigen::Index n = segments.front().generator.rows();
  double total = 0.0;
  for (const auto& s : segments) {
    require_generator(s.generator, "segment generator");
    if (s.generator.rows() != n) {
      throw Error(ErrorKind::InvalidPath, "segment generators differ in dimension");
    }
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) {
      throw Error(ErrorKind::InvalidPath, "segment durations must be positive");
    }
    total += s.duration;
  }
  UnitaryPath p(PiecewiseConstant{std::move(segments)}, n, total);
  ComplexMatrix u = ComplexMatrix::Identity(n, n);
  for (const auto& s : std::get<PiecewiseConstant>(p.rep_).segments) {
    p.eig_.push_back(hermitian_eig(s.generator));
    p.prefix_.push_back(u);
    u = exp_skew(p.eig_.back(), s.duration) * u;
  }
  return p;
}

UnitaryPath UnitaryPath::sampled(std::vector<double> times, std::vector<ComplexMatrix> unitaries) {
  if (times.size() != unitaries.size() || times.size() < 3) {
    throw Error(ErrorKind::InvalidPath, "sampled path needs matching times and at least 3 nodes");
  }
  if (times.front() != 0.0) throw Error(ErrorKind::InvalidPath, "sampled path must start at t = 0");
  const double duration = times.back();
  if (!(duration > 0.0)) throw Error(ErrorKind::InvalidPath, "sampled path has zero duration");
  const double dt = duration / static_cast<double>(times.size() - 1);
  const Eigen::Index n = unitaries.front().rows();
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (j > 0 && !(times[j] > times[j - 1])) {
      throw Error(ErrorKind::InvalidPath, "sample times must be strictly increasing");
    }
    if (std::abs(times[j] - static_cast<double>(j) * dt) > kTimeRelTol * duration) {
      throw Error(ErrorKind::GridMismatch, "sample times must be uniformly spaced");
    }
    require_square_finite(unitaries[j], "sampled unitary");
    if (unitaries[j].rows() != n) {
      throw Error(ErrorKind::InvalidPath, "sampled unitaries differ in dimension");
    }
    if (unitarity_defect(unitaries[j]) > kDefaultUnitaryTol) {
      throw Error(ErrorKind::NotUnitary,
                  "sampled unitary at node " + std::to_string(j) + " is not unitary");
    }
  }
  if ((unitaries.front() - ComplexMatrix::Identity(n, n)).norm() > kDefaultUnitaryTol) {
    throw Error(ErrorKind::InvalidPath, "sampled path must satisfy U(0) = I");
  }
  return UnitaryPath(Sampled{std::move(times), std::move(unitaries)}, n, duration);
}

ComplexMatrix UnitaryPath::evaluate(double t) const {
  if (t < 0.0 || t > duration_ * (1.0 + kTimeRelTol)) {
    throw Error(ErrorKind::GridMismatch, "time " + std::to_string(t) + " outside [0, τ]");
  }
  if (const auto* s = std::get_if<Sampled>(&rep_)) {
    const double dt = duration_ / static_cast<double>(s->times.size() - 1);
    const auto j = static_cast<std::size_t>(std::llround(t / dt));
    if (j >= s->times.size() || std::abs(s->times[j] - t) > kTimeRelTol * duration_) {
      throw Error(ErrorKind::GridMismatch, "sampled path has no node at t = " + std::to_string(t));
    }
    if (j == 0) return ComplexMatrix::Identity(dim_, dim_);
    return s->unitaries[j];
  }
  if (std::holds_alternative<ConstantGenerator>(rep_)) return exp_skew(eig_.front(), t);

  const auto& segs = std::get<PiecewiseConstant>(rep_).segments;
  double start = 0.0;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const double stop = start + segs[k].duration;
    if (t < stop || k + 1 == segs.size()) {
      return exp_skew(eig_[k], std::min(t, stop) - start) * prefix_[k];
    }
    start = stop;
  }
  return ComplexMatrix::Identity(dim_, dim_);
}

namespace {

void require_matching_duration(const UnitaryPath& path, const TimeGrid& grid) {
  if (std::abs(grid.duration() - path.duration()) > kTimeRelTol * path.duration()) {
    throw Error(ErrorKind::GridMismatch, "grid duration " + std::to_string(grid.duration()) +
                                             " does not match path duration " +
                                             std::to_string(path.duration()));
  }
}

std::size_t sampled_stride(const Sampled& s, const TimeGrid& grid) {
  const std::size_t path_steps = s.times.size() - 1;
  if (path_steps % grid.steps() != 0) {
    throw Error(ErrorKind::GridMismatch, "grid with " + std::to_string(grid.steps()) +
                                             " steps does not align with a sampled path of " +
                                             std::to_string(path_steps) + " steps");
  }
  return path_steps / grid.steps();
}

}  // namespace

std::vector<ComplexMatrix> sample_path(const UnitaryPath& path, const TimeGrid& grid) {
  require_matching_duration(path, grid);
  std::vector<ComplexMatrix> out;
  out.reserve(grid.nodes());
  out.push_back(ComplexMatrix::Identity(path.dim(), path.dim()));
  if (const auto* s = std::get_if<Sampled>(&path.representation())) {
    const std::size_t stride = sampled_stride(*s, grid);
    for (std::size_t j = 1; j < grid.nodes(); ++j) out.push_back(s->unitaries[j * stride]);
    return out;
  }
  for (std::size_t j = 1; j < grid.nodes(); ++j) out.push_back(path.evaluate(grid.node(j)));
  return out;
}

TimeGrid natural_grid(const UnitaryPath& path, std::size_t steps) {
  if (const auto* s = std::get_if<Sampled>(&path.representation())) {
    return TimeGrid(path.duration(), s->times.size() - 1);
  }
  return TimeGrid(path.duration(), steps);
}

ConnectionSample connection(const UnitaryPath& path, const TimeGrid& grid) {
  require_matching_duration(path, grid);
  ConnectionSample out;
  out.midpoints.reserve(grid.steps());
  out.values.reserve(grid.steps());
  for (std::size_t j = 0; j < grid.steps(); ++j) out.midpoints.push_back(grid.midpoint(j));

  const double dt = grid.dt();
  auto log_step = [&](const ComplexMatrix& u0, const ComplexMatrix& u1) {
    return ComplexMatrix(principal_log_unitary(u0.adjoint() * u1) / dt);
  };

  std::visit(
      [&](const auto& rep) {
        using T = std::decay_t<decltype(rep)>;
        if constexpr (std::is_same_v<T, ConstantGenerator>) {
          const ComplexMatrix a = minus_i(rep.generator);
          out.values.assign(grid.steps(), a);
        } else if constexpr (std::is_same_v<T, PiecewiseConstant>) {
          std::vector<double> bounds{0.0};
          for (const auto& s : rep.segments) bounds.push_back(bounds.back() + s.duration);
          const double slack = kTimeRelTol * path.duration();
          std::size_t k = 0;
          for (std::size_t j = 0; j < grid.steps(); ++j) {
            const double t0 = grid.node(j);
            const double t1 = grid.node(j + 1);
            while (k + 1 < rep.segments.size() && t0 >= bounds[k + 1] - slack) ++k;
            if (t1 <= bounds[k + 1] + slack || k + 1 == rep.segments.size()) {
              out.values.push_back(minus_i(rep.segments[k].generator));
            } else {
              out.values.push_back(log_step(path.evaluate(t0), path.evaluate(t1)));
            }
          }
        } else {
          const std::size_t stride = sampled_stride(rep, grid);
          for (std::size_t j = 0; j < grid.steps(); ++j) {
            const ComplexMatrix& u0 =
                j == 0 ? ComplexMatrix::Identity(path.dim(), path.dim()).eval()
                       : rep.unitaries[j * stride];
            out.values.push_back(log_step(u0, rep.unitaries[(j + 1) * stride]));
          }
        }
      },
      path.representation());
  return out;
}

std::vector<ComplexMatrix> path_ordered_block_exp(const ConnectionSample& conn,
                                                  const ComplexMatrix& frame,
                                                  const TimeGrid& grid) {
  if (conn.values.size() != grid.steps()) {
    throw Error(ErrorKind::GridMismatch, "connection sample does not match the grid");
  }
  const Eigen::Index m = frame.cols();
  const double dt = grid.dt();
  std::vector<ComplexMatrix> alpha;
  alpha.reserve(grid.nodes());
  alpha.push_back(ComplexMatrix::Identity(m, m));

  ComplexMatrix step;
  const ComplexMatrix* previous = nullptr;
  for (std::size_t j = 0; j < grid.steps(); ++j) {
    const ComplexMatrix& a = conn.values[j];
    if (previous == nullptr || !(a.rows() == previous->rows() && a == *previous)) {
      if (a.rows() != frame.rows()) {
        throw Error(ErrorKind::StructureMismatch, "block frame does not match the connection");
      }
      // Ã skew-Hermitian, so K = iÃ is Hermitian and exp(−ÃΔt) = exp(iKΔt).
      ComplexMatrix k = Complex(0.0, 1.0) * (frame.adjoint() * a * frame);
      k = 0.5 * (k + k.adjoint());
      step = exp_skew(hermitian_eig(k), -dt);
      previous = &a;
    }
    alpha.push_back(step * alpha.back());
  }
  return alpha;
}

std::vector<ComplexMatrix> path_ordered_block_exp(const ConnectionSample& conn,
                                                  const std::vector<Eigen::Index>& block,
                                                  const TimeGrid& grid) {
  if (conn.values.empty()) throw Error(ErrorKind::GridMismatch, "empty connection sample");
  const Eigen::Index n = conn.values.front().rows();
  ComplexMatrix frame = ComplexMatrix::Zero(n, static_cast<Eigen::Index>(block.size()));
  for (std::size_t c = 0; c < block.size(); ++c) {
    const Eigen::Index idx = block[c];
    if (idx < 0 || idx >= n) throw Error(ErrorKind::IndexOutOfRange, "block index out of range");
    for (std::size_t d = 0; d < c; ++d) {
      if (block[d] == idx) throw Error(ErrorKind::StructureMismatch, "block indices repeat");
    }
    frame(idx, static_cast<Eigen::Index>(c)) = 1.0;
  }
  return path_ordered_block_exp(conn, frame, grid);
}

std::vector<ComplexMatrix> block_transport(const std::vector<ComplexMatrix>& samples,
                                           const ComplexMatrix& frame) {
  const Eigen::Index m = frame.cols();
  std::vector<ComplexMatrix> alpha;
  alpha.reserve(samples.size());
  alpha.push_back(ComplexMatrix::Identity(m, m));
  for (std::size_t j = 0; j + 1 < samples.size(); ++j) {
    const ComplexMatrix overlap = frame.adjoint() * samples[j + 1].adjoint() * samples[j] * frame;
    Eigen::JacobiSVD<ComplexMatrix> svd(overlap, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() < 0.5) {
      throw Error(ErrorKind::BranchAmbiguity,
                  "block overlap is nearly singular at step " + std::to_string(j) +
                      "; refine the time grid");
    }
    alpha.push_back(svd.matrixU() * svd.matrixV().adjoint() * alpha.back());
  }
  return alpha;
}

CyclicityResult cyclicity_check_at(const DensityMatrix& rho0, const UnitaryPath& path, double t,
                                   double tol) {
  const ComplexMatrix u = path.evaluate(t);
  const double residual = (u * rho0.matrix() * u.adjoint() - rho0.matrix()).norm();
  return {residual <= tol, residual};
}

CyclicityResult cyclicity_check(const DensityMatrix& rho0, const UnitaryPath& path, double tol) {
  return cyclicity_check_at(rho0, path, path.duration(), tol);
}

}  // namespace mixedphase
