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

#include "qdslab/grid.hpp"

#include <cmath>
#include <sstream>

namespace qdslab {

GridSpec::GridSpec(int dim, double half_width, int points, int bulk_width)
    : dim_(dim), half_width_(half_width), points_(points), bulk_width_(bulk_width) {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorKind::Dimension, "grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (!(half_width > 0.0) || !std::isfinite(half_width)) {
    throw Error(ErrorKind::InvalidArgument, "grid half-width must be positive and finite");
  }
  if (points < 8) {
    throw Error(ErrorKind::InvalidArgument, "grid needs at least 8 points per axis");
  }
  if (bulk_width < 1 || 2 * bulk_width >= points) {
    throw Error(ErrorKind::InvalidArgument, "bulk width must satisfy 1 <= w and 2w < N");
  }
}

Index GridSpec::size() const noexcept {
  return dim_ == 1 ? Index(points_) : Index(points_) * points_;
}

std::array<int, 2> GridSpec::axis_indices(Index flat) const noexcept {
  if (dim_ == 1) return {int(flat), 0};
  return {int(flat / points_), int(flat % points_)};
}

std::array<double, 2> GridSpec::point(Index flat) const noexcept {
  auto ij = axis_indices(flat);
  return {coordinate(ij[0]), dim_ == 2 ? coordinate(ij[1]) : 0.0};
}

bool GridSpec::in_bulk(Index flat) const noexcept {
  auto ij = axis_indices(flat);
  for (int a = 0; a < dim_; ++a) {
    if (ij[a] < bulk_width_ || ij[a] > points_ - 1 - bulk_width_) return false;
  }
  return true;
}

std::vector<Index> GridSpec::bulk_indices() const {
  std::vector<Index> out;
  for (Index i = 0; i < size(); ++i) {
    if (in_bulk(i)) out.push_back(i);
  }
  return out;
}

std::string GridSpec::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "d=" << dim_ << " R=" << half_width_ << " N=" << points_ << " h=" << spacing()
     << " M=" << size() << " w=" << bulk_width_;
  return os.str();
}

std::string to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::Hermitian: return "hermitian";
    case OperatorTag::AntiHermitian: return "anti-hermitian";
    case OperatorTag::Diagonal: return "diagonal";
    case OperatorTag::General: return "general";
  }
  return "general";
}

bool DiscreteOperator::satisfies_tag() const {
  const double scale = max_abs(matrix);
  switch (tag) {
    case OperatorTag::Hermitian:
      return max_abs(matrix - matrix.adjoint()) <= 1e-14 * scale;
    case OperatorTag::AntiHermitian:
      return max_abs(matrix + matrix.adjoint()) <= 1e-14 * scale;
    case OperatorTag::Diagonal: {
      for (Index j = 0; j < matrix.cols(); ++j)
        for (Index i = 0; i < matrix.rows(); ++i)
          if (i != j && matrix(i, j) != Complex(0.0)) return false;
      return true;
    }
    case OperatorTag::General:
      return true;
  }
  return true;
}

namespace {

RMatrix derivative_1d(int n, double h) {
  RMatrix d = RMatrix::Zero(n, n);
  const double c = 1.0 / (2.0 * h);
  for (int i = 0; i + 1 < n; ++i) {
    d(i, i + 1) = c;
    d(i + 1, i) = -c;
  }
  return d;
}

RMatrix laplacian_1d(int n, double h) {
  RMatrix l = RMatrix::Zero(n, n);
  const double c = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    l(i, i) = -2.0 * c;
    if (i + 1 < n) {
      l(i, i + 1) = c;
      l(i + 1, i) = c;
    }
  }
  return l;
}

// Tensor lift of a 1-d axis operator onto the flat d-dimensional index.
RMatrix lift(const GridSpec& g, const RMatrix& op1d, int axis) {
  if (g.dim() == 1) return op1d;
  const int n = g.points();
  RMatrix out = RMatrix::Zero(g.size(), g.size());
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int k = 0; k < n; ++k) {
        if (axis == 0) {
          const double v = op1d(a, k);
          if (v != 0.0) out(Index(a) * n + b, Index(k) * n + b) = v;
        } else {
          const double v = op1d(b, k);
          if (v != 0.0) out(Index(a) * n + b, Index(a) * n + k) = v;
        }
      }
    }
  }
  return out;
}

}  // namespace

DiscreteOperator derivative_operator(const GridSpec& grid, int axis) {
  if (axis < 0 || axis >= grid.dim()) {
    throw Error(ErrorKind::InvalidArgument,
                "derivative axis " + std::to_string(axis) + " out of range for d=" +
                    std::to_string(grid.dim()));
  }
  RMatrix d = lift(grid, derivative_1d(grid.points(), grid.spacing()), axis);
  return {d.cast<Complex>(), OperatorTag::AntiHermitian, grid};
}

DiscreteOperator laplacian(const GridSpec& grid) {
  const RMatrix l1 = laplacian_1d(grid.points(), grid.spacing());
  RMatrix l = lift(grid, l1, 0);
  if (grid.dim() == 2) l += lift(grid, l1, 1);
  return {l.cast<Complex>(), OperatorTag::Hermitian, grid};
}

RVector sample(const GridSpec& grid, const ScalarFunction& f) {
  RVector v(grid.size());
  for (Index i = 0; i < grid.size(); ++i) {
    auto p = grid.point(i);
    v(i) = f(std::span<const double>(p.data(), std::size_t(grid.dim())));
  }
  return v;
}

DiscreteOperator multiplication_operator(const GridSpec& grid, const ScalarFunction& f) {
  RVector v = sample(grid, f);
  if (!v.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "multiplication operator sample is not finite");
  }
  CMatrix m = CMatrix::Zero(grid.size(), grid.size());
  m.diagonal() = v.cast<Complex>();
  return {std::move(m), OperatorTag::Diagonal, grid};
}

CMatrix restrict_to(const CMatrix& a, const std::vector<Index>& indices) {
  const Index n = Index(indices.size());
  CMatrix out(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out(i, j) = a(indices[i], indices[j]);
  return out;
}

CVector embed(const CVector& v, const std::vector<Index>& indices, Index full_size) {
  CVector out = CVector::Zero(full_size);
  for (Index i = 0; i < Index(indices.size()); ++i) out(indices[i]) = v(i);
  return out;
}

}  // namespace qdslab
