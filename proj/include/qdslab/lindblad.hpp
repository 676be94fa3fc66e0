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

#include <vector>

#include "qdslab/common.hpp"
#include "qdslab/field.hpp"
#include "qdslab/grid.hpp"

namespace qdslab {

/// Discrete jump operators, Hamiltonian and dissipative parts built from a drift W.
///
///   L_l = -(W_l + D_l)
///   H   = (i/2) sum_l (W_l D_l + D_l W_l)
///   G0  = -(1/2) sum_l L_l^* L_l
///   G   = -i H + G0
///   Phi = -2 G0,  C = Phi + shift * I
///
/// With D_l exactly antisymmetric, H is exactly Hermitian and G + G^* + Phi = 0
/// holds to round-off.
struct LindbladSystem {
  GridSpec grid;
  VectorField field;
  double shift = 1.0;

  std::vector<CMatrix> jumps;  // L_l
  CMatrix hamiltonian;         // H
  CMatrix g0;                  // G0
  CMatrix generator;           // G
  CMatrix phi;                 // Phi
  CMatrix c;                   // C
  RMatrix drift;               // M x d samples of W_l on the lattice

  Index size() const noexcept { return grid.size(); }

  /// max |G + G^* + Phi|.
  double form_identity_residual() const;
};

LindbladSystem assemble(const VectorField& w, const GridSpec& grid, double shift = 1.0);

/// L(X) = G^* X + X G + sum_l L_l^* X L_l.
CMatrix generator_apply(const LindbladSystem& sys, const CMatrix& x);

/// Scalar field with closed-form gradient and Laplacian.
struct SmoothFunction {
  ScalarFunction value;
  std::function<double(int axis, std::span<const double>)> gradient;
  ScalarFunction laplacian;
};

SmoothFunction gaussian_function(int dim, double variance, std::vector<double> center = {});

/// Bulk-supported smooth probe vectors: real Gaussian packets of width
/// `width` centred on a fixed continuum lattice inside the bulk.
std::vector<CVector> bulk_probe_vectors(const GridSpec& grid, double width = 0.5);

struct ClassicalResidual {
  double max_relative = 0.0;
  bool boundary_contaminated = false;
};

/// Compares L(diag f) u with diag(f''/2 - 2 W.grad f) u on bulk probe vectors.
/// The residual is normalised by max(|f|_inf, |target|_inf) over the lattice.
ClassicalResidual classical_generator_residual(const LindbladSystem& sys, const SmoothFunction& f);

}  // namespace qdslab
