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

#include "qdslab/lindblad.hpp"

#include <cmath>

namespace qdslab {

double LindbladSystem::form_identity_residual() const {
  return max_abs(generator + generator.adjoint() + phi);
}

LindbladSystem assemble(const VectorField& w, const GridSpec& grid, double shift) {
  if (w.dim() != grid.dim()) {
    throw Error(ErrorKind::Dimension, "field dimension " + std::to_string(w.dim()) +
                                          " does not match grid dimension " +
                                          std::to_string(grid.dim()));
  }
  if (!(shift >= 0.0) || !std::isfinite(shift)) {
    throw Error(ErrorKind::InvalidArgument, "shift must be a finite non-negative number");
  }
  const int d = grid.dim();
  const Index m = grid.size();

  RMatrix drift(m, d);
  for (Index p = 0; p < m; ++p) {
    auto x = grid.point(p);
    for (int l = 0; l < d; ++l) {
      drift(p, l) = w.value(l, std::span<const double>(x.data(), std::size_t(d)));
    }
  }
  if (!drift.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "drift field is not finite (or not real) on the grid");
  }

  LindbladSystem sys{grid, w, shift, {}, CMatrix::Zero(m, m), CMatrix::Zero(m, m), {}, {}, {}, {}};
  CMatrix lsum = CMatrix::Zero(m, m);
  const Complex half_i(0.0, 0.5);
  for (int l = 0; l < d; ++l) {
    const CMatrix dl = derivative_operator(grid, l).matrix;
    const CVector wvec = drift.col(l).cast<Complex>();
    const auto wl = wvec.asDiagonal();
    CMatrix jump = -dl;
    jump.diagonal() -= wvec;
    // W D + D W entrywise is D_ij (W_i + W_j); summing in this order keeps H
    // bit-exactly Hermitian since D is bit-exactly antisymmetric.
    sys.hamiltonian += half_i * (wl * dl + dl * wl);
    lsum.noalias() += jump.adjoint() * jump;
    sys.jumps.push_back(std::move(jump));
  }
  sys.g0 = -0.5 * hermitian_part(lsum);
  sys.generator = Complex(0.0, -1.0) * sys.hamiltonian + sys.g0;
  sys.phi = -2.0 * sys.g0;
  sys.c = sys.phi;
  sys.c.diagonal().array() += shift;
  // Snap the diagonal so that C - Phi reproduces the shift exactly in floating
  // point (exact whenever the shift is representable on the grid of ulp(C_ii)).
  sys.phi.diagonal() = sys.c.diagonal().array() - shift;
  sys.drift = std::move(drift);
  return sys;
}

CMatrix generator_apply(const LindbladSystem& sys, const CMatrix& x) {
  if (x.rows() != sys.size() || x.cols() != sys.size()) {
    throw Error(ErrorKind::Dimension, "observable is " + std::to_string(x.rows()) + "x" +
                                          std::to_string(x.cols()) + ", system dimension is " +
                                          std::to_string(sys.size()));
  }
  CMatrix out = sys.generator.adjoint() * x;
  out.noalias() += x * sys.generator;
  for (const auto& l : sys.jumps) out.noalias() += l.adjoint() * (x * l);
  return out;
}

SmoothFunction gaussian_function(int dim, double variance, std::vector<double> center) {
  if (center.empty()) center.assign(std::size_t(dim), 0.0);
  auto r2 = [dim, center](std::span<const double> x) {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += (x[a] - center[a]) * (x[a] - center[a]);
    return s;
  };
  SmoothFunction f;
  f.value = [=](std::span<const double> x) { return std::exp(-r2(x) / (2.0 * variance)); };
  f.gradient = [=](int a, std::span<const double> x) {
    return -(x[a] - center[a]) / variance * std::exp(-r2(x) / (2.0 * variance));
  };
  f.laplacian = [=](std::span<const double> x) {
    const double s = r2(x);
    return (s / (variance * variance) - dim / variance) * std::exp(-s / (2.0 * variance));
  };
  return f;
}

std::vector<CVector> bulk_probe_vectors(const GridSpec& grid, double width) {
  const double r = grid.half_width();
  const std::vector<double> centers{-0.5 * r, -0.25 * r, 0.0, 0.25 * r, 0.5 * r};
  std::vector<CVector> out;
  auto make = [&](double cx, double cy) {
    CVector u(grid.size());
    for (Index p = 0; p < grid.size(); ++p) {
      auto x = grid.point(p);
      double s = (x[0] - cx) * (x[0] - cx);
      if (grid.dim() == 2) s += (x[1] - cy) * (x[1] - cy);
      u(p) = grid.in_bulk(p) ? std::exp(-s / (2.0 * width * width)) : 0.0;
    }
    out.push_back(u / u.norm());
  };
  for (double cx : centers) {
    if (grid.dim() == 1) {
      make(cx, 0.0);
    } else {
      for (double cy : centers) make(cx, cy);
    }
  }
  return out;
}

ClassicalResidual classical_generator_residual(const LindbladSystem& sys, const SmoothFunction& f) {
  const GridSpec& g = sys.grid;
  const int d = g.dim();
  const Index m = g.size();
  RVector fv(m), target(m);
  double f_scale = 0.0;
  double boundary = 0.0;
  for (Index p = 0; p < m; ++p) {
    auto x = g.point(p);
    std::span<const double> xs(x.data(), std::size_t(d));
    fv(p) = f.value(xs);
    double t = 0.5 * f.laplacian(xs);
    for (int l = 0; l < d; ++l) t -= 2.0 * sys.drift(p, l) * f.gradient(l, xs);
    target(p) = t;
    f_scale = std::max(f_scale, std::abs(fv(p)));
    if (!g.in_bulk(p)) boundary = std::max(boundary, std::abs(fv(p)));
  }
  CMatrix fx = CMatrix::Zero(m, m);
  fx.diagonal() = fv.cast<Complex>();
  const CMatrix lf = generator_apply(sys, fx);
  const double scale = std::max({f_scale, target.cwiseAbs().maxCoeff(), 1e-300});

  ClassicalResidual out;
  out.boundary_contaminated = boundary > 1e-8 * f_scale;
  for (const CVector& u : bulk_probe_vectors(g)) {
    const CVector diff = lf * u - (target.cast<Complex>().array() * u.array()).matrix();
    out.max_relative = std::max(out.max_relative, diff.norm() / scale);
  }
  return out;
}

}  // namespace qdslab
