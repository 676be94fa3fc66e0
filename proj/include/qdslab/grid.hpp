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

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qdslab/common.hpp"

namespace qdslab {

/// Uniform box lattice on [-R, R]^d with Dirichlet truncation.
///
/// Points per axis are x_i = -R + i*h, h = 2R/(N-1). For d = 2 the flat
/// index is i0 * N + i1, i.e. axis 0 varies slowest.
class GridSpec {
 public:
  /// Validates N >= 8, R > 0, w >= 1, 2w < N and d in {1, 2}.
  GridSpec(int dim, double half_width, int points, int bulk_width = 3);

  int dim() const noexcept { return dim_; }
  double half_width() const noexcept { return half_width_; }
  int points() const noexcept { return points_; }
  int bulk_width() const noexcept { return bulk_width_; }
  double spacing() const noexcept { return 2.0 * half_width_ / (points_ - 1); }
  Index size() const noexcept;

  double coordinate(int i) const noexcept { return -half_width_ + i * spacing(); }
  std::array<int, 2> axis_indices(Index flat) const noexcept;
  std::array<double, 2> point(Index flat) const noexcept;

  bool in_bulk(Index flat) const noexcept;
  /// Flat indices of lattice sites at distance >= w layers from every face.
  std::vector<Index> bulk_indices() const;

  GridSpec with_points(int points) const { return {dim_, half_width_, points, bulk_width_}; }
  std::string describe() const;

  bool operator==(const GridSpec&) const = default;

 private:
  int dim_;
  double half_width_;
  int points_;
  int bulk_width_;
};

enum class OperatorTag { Hermitian, AntiHermitian, Diagonal, General };

std::string to_string(OperatorTag tag);

struct DiscreteOperator {
  CMatrix matrix;
  OperatorTag tag = OperatorTag::General;
  GridSpec grid;

  /// Checks the structural tag against the matrix (tolerance 1e-14 relative).
  bool satisfies_tag() const;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Centered second-order difference along `axis` (0-based). Exactly antisymmetric.
DiscreteOperator derivative_operator(const GridSpec& grid, int axis);

/// 3-point-per-axis Laplacian; symmetric and negative definite.
DiscreteOperator laplacian(const GridSpec& grid);

/// diag(f(x)) over lattice points. Throws on non-finite samples.
DiscreteOperator multiplication_operator(const GridSpec& grid, const ScalarFunction& f);

/// Samples a scalar function on the lattice.
RVector sample(const GridSpec& grid, const ScalarFunction& f);

/// Principal submatrix on the given index set.
CMatrix restrict_to(const CMatrix& a, const std::vector<Index>& indices);
CVector embed(const CVector& v, const std::vector<Index>& indices, Index full_size);

}  // namespace qdslab
