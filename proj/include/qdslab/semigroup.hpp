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

#pragma once

#include <optional>
#include <vector>

#include "qdslab/common.hpp"
#include "qdslab/lindblad.hpp"

namespace qdslab {

/// Uniform nodes t_m = m * T / steps, m = 0..steps.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double step() const noexcept { return horizon_ / steps_; }
  double node(int m) const noexcept { return m * step(); }

 private:
  double horizon_;
  int steps_;
};

/// P(t) = exp(tG) by scaling and squaring. Throws Numerical if the result is
/// not finite or fails the contraction certificate |P(t)|_2 <= 1 + 1e-10.
DiscreteOperator propagator(const LindbladSystem& sys, double t);

/// Largest singular value.
double spectral_norm(const CMatrix& a);

/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const CMatrix& a);

enum class MonotonicityTracking { Auto, Always, Never };

/// Interpolation of T_s between nodes inside the Picard integral.
/// Linear keeps every quadrature weight positive, so each sweep is a positive
/// map and the iterates of a positive X are non-decreasing. Quadratic
/// (three-node Lagrange) is third-order in the step but drops that guarantee.
enum class Quadrature { Linear, Quadratic };

struct PicardOptions {
  double tol = 1e-9;    // Frobenius residual between sweeps
  int max_iter = 200;
  MonotonicityTracking monotonicity = MonotonicityTracking::Auto;
  Quadrature quadrature = Quadrature::Linear;
};

struct SemigroupRun {
  TimeGrid time;
  std::vector<CMatrix> nodes;       // T_{t_m}(X), m = 0..steps
  int iterations = 0;
  std::vector<double> residuals;    // r_n = max_m |T^(n+1) - T^(n)|_F
  std::vector<double> monotonicity; // min_m lambda_min(T^(n+1) - T^(n)), when tracked
  bool converged = false;
  bool hermitian = false;
  double max_symmetrization = 0.0;  // largest re-symmetrization correction applied

  const CMatrix& final() const { return nodes.back(); }
};

/// Minimal-semigroup Picard iteration on the time grid.
///
/// Each sweep computes
///   T^(n+1)_{t_m} = P(t_m)^* X P(t_m)
///                 + sum_l int_0^{t_m} (L_l P(t_m - s))^* T^(n)_s (L_l P(t_m - s)) ds
/// with T^(n)_s linear between nodes and the propagator part of the integrand
/// integrated exactly (product integration). The exact kernel integrals are
/// Lyapunov solves in the Schur basis of G, which makes I a fixed point to
/// round-off and turns each sweep into a one-step recursion over the nodes.
SemigroupRun picard_run(const LindbladSystem& sys, const CMatrix& x, const TimeGrid& time,
                        const PicardOptions& options = {});

/// Power-iteration estimate of the operator norm of X -> L(X) (Hilbert-Schmidt).
double generator_norm_estimate(const LindbladSystem& sys, int iterations = 30);

/// Classical RK4 for dY/ds = L(Y), Y(0) = X. Throws Numerical when dt * |L|
/// exceeds 1 or the iterate diverges.
CMatrix master_oracle(const LindbladSystem& sys, const CMatrix& x, double t, double dt);

struct ChoiReport {
  double t = 0.0;
  Index dimension = 0;  // M^2
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  bool completely_positive = false;  // lambda_min >= -1e-8 * lambda_max
};

/// Choi matrix of X -> T_t(X) from the RK4 oracle applied to all matrix units.
/// Requires M <= 32.
ChoiReport choi_map(const LindbladSystem& sys, double t, double dt);

/// Crank-Nicolson for df/dt = f''/2 - 2 W.grad f with Dirichlet boundaries.
/// Throws Numerical when |f|_inf grows beyond 10 |f0|_inf.
RVector classical_solve(const VectorField& w, const GridSpec& grid, const RVector& f0, double t,
                        double dt);
RVector classical_solve(const VectorField& w, const GridSpec& grid, const ScalarFunction& f0,
                        double t, double dt);

struct ClassicalComparison {
  double max_error = 0.0;   // max_u |<u,T_t(X)u> - <u,diag(f_t)u>| / |u|^2 over bulk probes
  double leakage = 0.0;     // |offdiag T_t(X)|_F / |T_t(X)|_F
  bool converged = false;
  int iterations = 0;
};

/// Evolves X = diag(f0) with picard_run and f0 with classical_solve on the same
/// horizon `time.horizon()` and compares them on bulk probe vectors.
ClassicalComparison compare_classical(const LindbladSystem& sys, const ScalarFunction& f0,
                                      const TimeGrid& time, const PicardOptions& options = {});

}  // namespace qdslab
