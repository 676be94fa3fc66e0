// Copyright 2026 The qdslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qdslab/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

namespace qdslab {

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw Error(ErrorKind::InvalidArgument, "time horizon must be positive");
  }
  if (steps < 2) throw Error(ErrorKind::InvalidArgument, "time grid needs at least 2 steps");
}

double spectral_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

double min_eigenvalue(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Hermitian eigensolve failed");
  return es.eigenvalues()(0);
}

DiscreteOperator propagator(const LindbladSystem& sys, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw Error(ErrorKind::InvalidArgument, "propagator time must be finite and >= 0");
  }
  const Index m = sys.size();
  if (t == 0.0) return {CMatrix::Identity(m, m), OperatorTag::General, sys.grid};
  CMatrix p = (t * sys.generator).exp();
  if (!p.allFinite()) {
    throw Error(ErrorKind::Numerical, "matrix exponential overflowed; reduce t or the grid");
  }
  const double norm = spectral_norm(p);
  if (norm > 1.0 + 1e-10) {
    throw Error(ErrorKind::Numerical,
                "propagator is not a contraction: |P(t)|_2 - 1 = " + std::to_string(norm - 1.0));
  }
  return {std::move(p), OperatorTag::General, sys.grid};
}

namespace {

// Solves T^* Z + Z T = Q for upper-triangular T (Bartels-Stewart with both
// factors already triangular). Column j needs columns < j; within a column the
// lower-triangular T^* is forward-substituted.
CMatrix solve_triangular_lyapunov(const CMatrix& t, const CMatrix& q) {
  const Index n = t.rows();
  CMatrix z(n, n);
  CMatrix shifted = t.adjoint();
  const CVector diag = shifted.diagonal();
  for (Index j = 0; j < n; ++j) {
    z.col(j) = q.col(j);
    if (j > 0) z.col(j).noalias() -= z.leftCols(j) * t.col(j).head(j);
    shifted.diagonal() = diag.array() + t(j, j);
    shifted.triangularView<Eigen::Lower>().solveInPlace(z.col(j));
  }
  return z;
}

// Everything the sweep needs, expressed in the Schur basis G = U T U^*.
struct SchurKernel {
  CMatrix u;
  CMatrix t;
  CMatrix step;                 // U^* P(dt) U
  std::vector<CMatrix> jumps;   // U^* L_l U
  double dt = 0.0;

  SchurKernel(const LindbladSystem& sys, double dt_) : dt(dt_) {
    Eigen::ComplexSchur<CMatrix> schur(sys.generator);
    if (schur.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Schur decomposition failed");
    u = schur.matrixU();
    t = schur.matrixT();
    const CMatrix p = propagator(sys, dt).matrix;
    step = u.adjoint() * p * u;
    for (const auto& l : sys.jumps) jumps.push_back(u.adjoint() * l * u);
    for (Index i = 0; i < t.rows(); ++i) {
      if (!(t(i, i).real() < 0.0)) {
        throw Error(ErrorKind::Numerical,
                    "generator has an eigenvalue with non-negative real part; the kernel "
                    "integrals are singular");
      }
    }
  }

  CMatrix to_schur(const CMatrix& a) const { return u.adjoint() * a * u; }
  CMatrix from_schur(const CMatrix& a) const { return u * a * u.adjoint(); }

  // One propagation step E^* A E.
  CMatrix conjugate_step(const CMatrix& a) const { return step.adjoint() * (a * step); }

  // Y = sum_l L_l^* A L_l.
  CMatrix jump_sum(const CMatrix& a) const {
    CMatrix y = CMatrix::Zero(a.rows(), a.cols());
    for (const auto& l : jumps) y.noalias() += l.adjoint() * (a * l);
    return y;
  }

  // Exact kernel moments over one step, tau = r/dt:
  //   phi_p(Y) = int_0^dt tau^p P(r)^* Y P(r) dr,  p = 0, 1, 2.
  // Integrating d/dr (P^* Y P) = G^* (P^* Y P) + (P^* Y P) G by parts gives
  //   G^* phi_p + phi_p G = P(dt)^* Y P(dt) - [p > 0] (p/dt) phi_{p-1} - [p = 0] Y.
  void moments(const CMatrix& y, int count, std::array<CMatrix, 3>& phi) const {
    const CMatrix e = conjugate_step(y);
    phi[0] = solve_triangular_lyapunov(t, e - y);
    if (count > 1) phi[1] = solve_triangular_lyapunov(t, e - phi[0] / dt);
    if (count > 2) phi[2] = solve_triangular_lyapunov(t, e - (2.0 / dt) * phi[1]);
  }
};

// Interval j spans [s_j, s_{j+1}]; with s = s_{j+1} - tau*dt the integrand
// weight of each node is a polynomial in tau, applied through the moments.
CMatrix interval_contribution(const std::vector<std::array<CMatrix, 3>>& phi, int j, int steps,
                              Quadrature q) {
  const auto& right = phi[std::size_t(j) + 1];  // tau = 0
  const auto& left = phi[std::size_t(j)];       // tau = 1
  if (q == Quadrature::Linear) {
    // (1 - tau) Y_{j+1} + tau Y_j
    return right[0] - right[1] + left[1];
  }
  if (j + 2 <= steps) {
    // nodes tau = 0, 1, -1 (s_{j+1}, s_j, s_{j+2})
    const auto& far = phi[std::size_t(j) + 2];
    return (right[0] - right[2]) + 0.5 * (left[2] + left[1]) + 0.5 * (far[2] - far[1]);
  }
  // nodes tau = 0, 1, 2 (s_{j+1}, s_j, s_{j-1})
  const auto& far = phi[std::size_t(j) - 1];
  return 0.5 * (right[2] - 3.0 * right[1] + 2.0 * right[0]) + (2.0 * left[1] - left[2]) +
         0.5 * (far[2] - far[1]);
}

double frobenius_diff(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

bool is_psd(const CMatrix& x) {
  if (max_abs(x - x.adjoint()) > 1e-12 * std::max(1.0, max_abs(x))) return false;
  const double scale = std::max(1e-300, spectral_norm(x));
  return min_eigenvalue(x) >= -1e-12 * scale;
}

}  // namespace

SemigroupRun picard_run(const LindbladSystem& sys, const CMatrix& x, const TimeGrid& time,
                        const PicardOptions& options) {
  const Index m = sys.size();
  if (x.rows() != m || x.cols() != m) {
    throw Error(ErrorKind::Dimension, "observable does not match system dimension");
  }
  if (!x.allFinite()) throw Error(ErrorKind::InvalidArgument, "observable is not finite");
  if (!(options.tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (options.max_iter < 1) throw Error(ErrorKind::InvalidArgument, "max_iter must be >= 1");

  const int steps = time.steps();
  const SchurKernel kernel(sys, time.step());

  SemigroupRun run{time, {}, 0, {}, {}, false, false, 0.0};
  run.hermitian = max_abs(x - x.adjoint()) <= 1e-12 * std::max(1.0, max_abs(x));
  const bool track = options.monotonicity == MonotonicityTracking::Always ||
                     (options.monotonicity == MonotonicityTracking::Auto && is_psd(x));

  const CMatrix xs = kernel.to_schur(x);
  std::vector<CMatrix> current(std::size_t(steps) + 1);
  current[0] = xs;
  for (int k = 1; k <= steps; ++k) current[k] = kernel.conjugate_step(current[k - 1]);

  const int moment_count = options.quadrature == Quadrature::Linear ? 2 : 3;
  std::vector<std::array<CMatrix, 3>> phi(std::size_t(steps) + 1);
  std::vector<CMatrix> next(std::size_t(steps) + 1);
  std::vector<double> node_residual(std::size_t(steps) + 1);
  std::vector<double> node_monotone(std::size_t(steps) + 1);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    // Kernel moments of every node are independent given the previous iterate.
#pragma omp parallel for schedule(static)
    for (int k = 0; k <= steps; ++k) {
      kernel.moments(kernel.jump_sum(current[k]), moment_count, phi[k]);
    }
    next[0] = xs;
    for (int k = 1; k <= steps; ++k) {
      next[k] = kernel.conjugate_step(next[k - 1]);
      next[k] += interval_contribution(phi, k - 1, steps, options.quadrature);
    }
    if (run.hermitian) {
      for (auto& a : next) {
        const CMatrix sym = hermitian_part(a);
        run.max_symmetrization = std::max(run.max_symmetrization, max_abs(sym - a));
        a = sym;
      }
    }

#pragma omp parallel for schedule(static)
    for (int k = 0; k <= steps; ++k) {
      node_residual[k] = frobenius_diff(next[k], current[k]);
      if (track) node_monotone[k] = k == 0 ? 0.0 : min_eigenvalue(next[k] - current[k]);
    }
    const double residual = *std::max_element(node_residual.begin(), node_residual.end());
    run.residuals.push_back(residual);
    if (track) run.monotonicity.push_back(*std::min_element(node_monotone.begin(), node_monotone.end()));
    std::swap(current, next);
    run.iterations = iter + 1;
    if (!std::isfinite(residual)) throw Error(ErrorKind::Numerical, "Picard iterate is not finite");
    if (residual <= options.tol) {
      run.converged = true;
      break;
    }
  }

  run.nodes.resize(current.size());
  for (std::size_t k = 0; k < current.size(); ++k) run.nodes[k] = kernel.from_schur(current[k]);
  run.nodes[0] = x;
  return run;
}

double generator_norm_estimate(const LindbladSystem& sys, int iterations) {
  const Index m = sys.size();
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  CMatrix v(m, m);
  for (Index j = 0; j < m; ++j)
    for (Index i = 0; i < m; ++i) v(i, j) = Complex(normal(rng), normal(rng));
  v /= v.norm();
  // Hilbert-Schmidt adjoint of L: rho -> G rho + rho G^* + sum_l L_l rho L_l^*.
  auto adjoint_apply = [&](const CMatrix& r) {
    CMatrix out = sys.generator * r;
    out.noalias() += r * sys.generator.adjoint();
    for (const auto& l : sys.jumps) out.noalias() += l * (r * l.adjoint());
    return out;
  };
  double sigma2 = 0.0;
  for (int k = 0; k < iterations; ++k) {
    CMatrix w = adjoint_apply(generator_apply(sys, v));
    sigma2 = w.norm();
    if (sigma2 == 0.0) return 0.0;
    v = w / sigma2;
  }
  // Power iteration approaches the top singular value from below; pad slightly.
  return 1.05 * std::sqrt(sigma2);
}

CMatrix master_oracle(const LindbladSystem& sys, const CMatrix& x, double t, double dt) {
  if (x.rows() != sys.size() || x.cols() != sys.size()) {
    throw Error(ErrorKind::Dimension, "observable does not match system dimension");
  }
  if (!(t >= 0.0) || !(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "need t >= 0 and dt > 0");
  if (t == 0.0) return x;
  if (dt > t) throw Error(ErrorKind::InvalidArgument, "oracle step exceeds the horizon");
  const int steps = int(std::ceil(t / dt - 1e-12));
  const double h = t / steps;
  const double bound = generator_norm_estimate(sys);
  if (h * bound > 1.0) {
    throw Error(ErrorKind::Numerical, "RK4 step too large: dt*|L| = " + std::to_string(h * bound) +
                                          " > 1; reduce dt");
  }
  const double limit = 1e6 * std::max(1.0, max_abs(x));
  CMatrix y = x;
  for (int s = 0; s < steps; ++s) {
    const CMatrix k1 = generator_apply(sys, y);
    const CMatrix k2 = generator_apply(sys, y + 0.5 * h * k1);
    const CMatrix k3 = generator_apply(sys, y + 0.5 * h * k2);
    const CMatrix k4 = generator_apply(sys, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!y.allFinite() || max_abs(y) > limit) {
      throw Error(ErrorKind::Numerical,
                  "RK4 oracle diverged at step " + std::to_string(s + 1) + " of " +
                      std::to_string(steps));
    }
  }
  return y;
}

ChoiReport choi_map(const LindbladSystem& sys, double t, double dt) {
  const Index m = sys.size();
  if (m > 32) {
    throw Error(ErrorKind::Dimension,
                "Choi matrix needs M <= 32, system has M = " + std::to_string(m));
  }
  CMatrix choi(m * m, m * m);
  std::vector<std::pair<Index, Index>> units;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) units.emplace_back(i, j);
#pragma omp parallel for schedule(dynamic)
  for (std::size_t u = 0; u < units.size(); ++u) {
    const auto [i, j] = units[u];
    CMatrix e = CMatrix::Zero(m, m);
    e(i, j) = 1.0;
    const CMatrix te = t == 0.0 ? e : master_oracle(sys, e, t, dt);
    choi.block(i * m, j * m, m, m) = te;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(choi), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Choi eigensolve failed");
  ChoiReport r;
  r.t = t;
  r.dimension = m * m;
  r.lambda_min = es.eigenvalues()(0);
  r.lambda_max = es.eigenvalues()(m * m - 1);
  r.completely_positive = r.lambda_min >= -1e-8 * r.lambda_max;
  return r;
}

RVector classical_solve(const VectorField& w, const GridSpec& grid, const RVector& f0, double t,
                        double dt) {
  if (w.dim() != grid.dim()) throw Error(ErrorKind::Dimension, "field and grid dimensions differ");
  if (f0.size() != grid.size()) throw Error(ErrorKind::Dimension, "initial data has wrong length");
  if (!(t >= 0.0) || !(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "need t >= 0 and dt > 0");
  if (t == 0.0) return f0;
  const Index m = grid.size();
  RMatrix a = 0.5 * laplacian(grid).matrix.real();
  for (int l = 0; l < grid.dim(); ++l) {
    RVector wl(m);
    for (Index p = 0; p < m; ++p) {
      auto x = grid.point(p);
      wl(p) = w.value(l, std::span<const double>(x.data(), std::size_t(grid.dim())));
    }
    a.noalias() -= 2.0 * wl.asDiagonal() * derivative_operator(grid, l).matrix.real();
  }
  const int steps = int(std::ceil(t / dt - 1e-12));
  const double h = t / steps;
  const RMatrix id = RMatrix::Identity(m, m);
  const Eigen::PartialPivLU<RMatrix> lhs(id - 0.5 * h * a);
  const RMatrix rhs = id + 0.5 * h * a;
  const double f0_max = std::max(f0.cwiseAbs().maxCoeff(), 1e-300);
  RVector f = f0;
  for (int s = 0; s < steps; ++s) {
    f = lhs.solve(rhs * f);
    if (!f.allFinite() || f.cwiseAbs().maxCoeff() > 10.0 * f0_max) {
      throw Error(ErrorKind::Numerical,
                  "Crank-Nicolson solution grew beyond 10x its initial size (advection-dominated?)");
    }
  }
  return f;
}

RVector classical_solve(const VectorField& w, const GridSpec& grid, const ScalarFunction& f0,
                        double t, double dt) {
  return classical_solve(w, grid, sample(grid, f0), t, dt);
}

ClassicalComparison compare_classical(const LindbladSystem& sys, const ScalarFunction& f0,
                                      const TimeGrid& time, const PicardOptions& options) {
  const RVector f0v = sample(sys.grid, f0);
  CMatrix x = CMatrix::Zero(sys.size(), sys.size());
  x.diagonal() = f0v.cast<Complex>();
  const SemigroupRun run = picard_run(sys, x, time, options);
  const RVector ft = classical_solve(sys.field, sys.grid, f0v, time.horizon(), time.step());
  const CMatrix& tx = run.final();

  ClassicalComparison out;
  out.converged = run.converged;
  out.iterations = run.iterations;
  for (const CVector& u : bulk_probe_vectors(sys.grid)) {
    const Complex quantum = u.dot(tx * u);
    const Complex classical = u.dot((ft.cast<Complex>().array() * u.array()).matrix());
    out.max_error = std::max(out.max_error, std::abs(quantum - classical) / u.squaredNorm());
  }
  CMatrix off = tx;
  off.diagonal().setZero();
  out.leakage = tx.norm() > 0.0 ? off.norm() / tx.norm() : 0.0;
  return out;
}

}  // namespace qdslab
