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


#include "qdslab/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qdslab/semigroup.hpp"

namespace qdslab {

std::string to_string(CFStatus s) {
  switch (s) {
    case CFStatus::Pass: return "pass";
    case CFStatus::Fail: return "fail";
    case CFStatus::Informational: return "informational";
  }
  return "?";
}

const CFCondition& CFReport::condition(const std::string& name) const {
  for (const auto& c : conditions)
    if (c.condition == name) return c;
  throw Error(ErrorKind::InvalidArgument, "no CF condition '" + name + "'");
}

namespace {

struct Extremum {
  double lambda = 0.0;
  CVector vector;  // in the restricted coordinates
};

// Largest eigenvalue of the Hermitian pencil (k, n), n positive definite.
Extremum pencil_max(const CMatrix& k, const CMatrix& n) {
  Eigen::LLT<CMatrix> llt(hermitian_part(n));
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorKind::InvalidArgument, "pencil normalization is not positive definite");
  }
  const CMatrix lower = llt.matrixL();
  CMatrix reduced = lower.triangularView<Eigen::Lower>().solve(hermitian_part(k));
  reduced = lower.triangularView<Eigen::Lower>().solve(reduced.adjoint()).adjoint();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(reduced));
  if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "pencil eigensolve failed");
  const Index top = es.eigenvalues().size() - 1;
  Extremum e;
  e.lambda = es.eigenvalues()(top);
  e.vector = lower.adjoint().triangularView<Eigen::Upper>().solve(es.eigenvectors().col(top));
  e.vector /= e.vector.norm();
  return e;
}

double quotient(const CMatrix& k, const CMatrix& n, const CVector& v) {
  return v.dot(k * v).real() / v.dot(n * v).real();
}

void check_square(const CMatrix& a, const CMatrix& b, const GridSpec& grid) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() ||
      a.rows() != grid.size()) {
    throw Error(ErrorKind::Dimension, "pencil operands must be square and match the grid");
  }
}

std::string bulk_label(const GridSpec& grid) {
  return "bulk(" + std::to_string(grid.bulk_width()) + ")";
}

PencilEstimate make_estimate(const std::string& label, const std::string& pencil,
                             const GridSpec& grid) {
  PencilEstimate p;
  p.label = label;
  p.pencil = pencil;
  p.subspace = bulk_label(grid);
  p.bulk_width = grid.bulk_width();
  p.resolution = grid.points();
  return p;
}

}  // namespace

std::vector<PencilEstimate> relative_bound(const CMatrix& a, const CMatrix& b,
                                           const std::vector<double>& offsets,
                                           const GridSpec& grid, const std::string& label) {
  check_square(a, b, grid);
  const auto bulk = grid.bulk_indices();
  const Index n = Index(bulk.size());
  // Columns of A and B restricted to bulk vectors; the forms then live on the bulk block.
  CMatrix ac(a.rows(), n), bc(b.rows(), n);
  for (Index j = 0; j < n; ++j) {
    ac.col(j) = a.col(bulk[std::size_t(j)]);
    bc.col(j) = b.col(bulk[std::size_t(j)]);
  }
  const CMatrix ata = ac.adjoint() * ac;
  const CMatrix btb = bc.adjoint() * bc;

  std::vector<PencilEstimate> out;
  for (double off : offsets) {
    if (!(off > 0.0)) throw Error(ErrorKind::InvalidArgument, "relative_bound needs offsets b > 0");
    CMatrix norm = ata;
    norm.diagonal().array() += off;
    const Extremum e = pencil_max(btb, norm);
    PencilEstimate p = make_estimate(label, "(B*B, A*A + b I)", grid);
    p.parameter = off;
    p.constant = std::max(0.0, e.lambda);
    p.offset = p.constant * off;
    p.witness = embed(e.vector, bulk, grid.size());
    p.witness_quotient = quotient(btb, norm, e.vector);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PencilEstimate> commutator_bound(const CMatrix& a, const CMatrix& b,
                                             const std::vector<double>& eps_list,
                                             const GridSpec& grid, const std::string& label) {
  check_square(a, b, grid);
  const auto bulk = grid.bulk_indices();
  const Index n = Index(bulk.size());
  CMatrix ac(a.rows(), n), bc(b.rows(), n);
  for (Index j = 0; j < n; ++j) {
    ac.col(j) = a.col(bulk[std::size_t(j)]);
    bc.col(j) = b.col(bulk[std::size_t(j)]);
  }
  const CMatrix ata = ac.adjoint() * ac;
  const CMatrix cross = ac.adjoint() * bc;
  const CMatrix kplus = hermitian_part(Complex(0.0, 1.0) * (cross - cross.adjoint()));
  const CMatrix id = CMatrix::Identity(n, n);

  std::vector<PencilEstimate> out;
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "commutator_bound needs eps > 0");
    for (int sign : {1, -1}) {
      const CMatrix form = double(sign) * kplus - eps * ata;
      const Extremum e = pencil_max(form, id);
      PencilEstimate p = make_estimate(label + (sign > 0 ? " (+)" : " (-)"),
                                       sign > 0 ? "(+i(A*B - B*A) - eps A*A, I)"
                                                : "(-i(A*B - B*A) - eps A*A, I)",
                                       grid);
      p.parameter = eps;
      p.constant = std::max(0.0, e.lambda);
      p.witness = embed(e.vector, bulk, grid.size());
      p.witness_quotient = quotient(form, id, e.vector);
      out.push_back(std::move(p));
    }
  }
  return out;
}

double relative_drift(double k1, double k2, double floor) {
  const double top = std::max(std::abs(k1), std::abs(k2));
  if (top <= floor) return 0.0;
  return std::abs(k2 - k1) / top;
}

namespace {

// sym(C G + G^* C + sum_l L_l^* C L_l). Independent of the shift because
// shift * (G + G^* + Phi) vanishes.
CMatrix cf_form(const LindbladSystem& sys) {
  CMatrix m = sys.c * sys.generator;
  m += m.adjoint().eval();
  for (const auto& l : sys.jumps) m.noalias() += l.adjoint() * (sys.c * l);
  return hermitian_part(m);
}

CFResolution resolve_k(const LindbladSystem& sys) {
  const auto bulk = sys.grid.bulk_indices();
  const CMatrix form = restrict_to(cf_form(sys), bulk);
  const CMatrix c = restrict_to(sys.c, bulk);
  const Extremum e = pencil_max(form, c);
  CFResolution r;
  r.points = sys.grid.points();
  r.k = std::max(0.0, e.lambda);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(c), Eigen::EigenvaluesOnly);
  r.c_norm = es.eigenvalues().cwiseAbs().maxCoeff();
  r.estimate = make_estimate("k", "(sym(CG + G*C + sum L*CL), C)", sys.grid);
  r.estimate.constant = r.k;
  r.estimate.witness = embed(e.vector, bulk, sys.size());
  r.estimate.witness_quotient = quotient(form, c, e.vector);
  return r;
}

}  // namespace

CFReport cf_check(const LindbladSystem& sys, const CFOptions& options) {
  CFReport rep{sys.field.description(), sys.grid, sys.shift, {}, {}, 0.0, 0.0, 0.0, 0.0, {}, ""};

  rep.conditions.push_back({"a", CFStatus::Informational, 0.0,
                            "domains coincide with the whole space in finite dimension"});
  rep.conditions.push_back({"b", CFStatus::Informational, 0.0,
                            "every subspace is a core for a bounded operator"});

  const double phi_max = max_abs(sys.phi);
  const double resid_c = max_abs(sys.generator + sys.generator.adjoint() + sys.phi);
  rep.conditions.push_back({"c", resid_c <= 1e-12 * (1.0 + phi_max) ? CFStatus::Pass : CFStatus::Fail,
                            resid_c, "max |G + G* + Phi|"});

  // C - Phi must be shift * I to the bit.
  const CMatrix gap = sys.c - sys.phi;
  bool exact = true;
  double lambda_min = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < gap.cols(); ++j) {
    for (Index i = 0; i < gap.rows(); ++i) {
      const Complex want = i == j ? Complex(sys.shift, 0.0) : Complex(0.0, 0.0);
      if (gap(i, j) != want) exact = false;
    }
    lambda_min = std::min(lambda_min, gap(j, j).real());
  }
  if (!exact) lambda_min = min_eigenvalue(gap);
  rep.conditions.push_back({"d", exact ? CFStatus::Pass : CFStatus::Fail, lambda_min,
                            exact ? "C - Phi = shift * I exactly"
                                  : "C - Phi differs from shift * I"});

  std::set<int> points(options.resolutions.begin(), options.resolutions.end());
  points.insert(sys.grid.points());
  for (int n : points) {
    if (n == sys.grid.points()) {
      rep.resolutions.push_back(resolve_k(sys));
    } else {
      rep.resolutions.push_back(resolve_k(assemble(sys.field, sys.grid.with_points(n), sys.shift)));
    }
  }
  bool finite = true;
  for (std::size_t i = 0; i < rep.resolutions.size(); ++i) {
    const auto& r = rep.resolutions[i];
    finite = finite && std::isfinite(r.k);
    if (r.points == sys.grid.points()) rep.k = r.k;
    if (i > 0) {
      const auto& prev = rep.resolutions[i - 1];
      const double floor = 1e-6 * std::max(r.c_norm, prev.c_norm);
      rep.drift = std::max(rep.drift, relative_drift(prev.k, r.k, floor));
    }
  }
  const bool trend = rep.resolutions.size() >= 2;
  const bool e_ok = finite && (!trend || rep.drift <= options.drift_tolerance);
  rep.conditions.push_back({"e", e_ok ? CFStatus::Pass : CFStatus::Fail, rep.k,
                            "k from the pencil (sym(CG + G*C + sum L*CL), C) on " +
                                bulk_label(sys.grid) + ", drift " + std::to_string(rep.drift)});

  rep.b8 = rep.k;
  {
    const auto bulk = sys.grid.bulk_indices();
    const CMatrix rest = restrict_to(cf_form(sys) - rep.k * sys.phi, bulk);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rest, Eigen::EigenvaluesOnly);
    const double b9 = std::max(0.0, es.eigenvalues()(es.eigenvalues().size() - 1));
    const double floor = 1e-6 * rep.resolutions.front().c_norm;
    rep.b9_over_b8 = rep.k > floor ? b9 / rep.k : 0.0;
  }

  if (options.auxiliary_bounds) {
    auto add = [&](std::vector<PencilEstimate> v) {
      for (auto& p : v) rep.bounds.push_back(std::move(p));
    };
    add(relative_bound(sys.g0, sys.hamiltonian, options.offsets, sys.grid, "H vs G0"));
    add(commutator_bound(sys.g0, sys.hamiltonian, options.eps_list, sys.grid, "[G0, H]"));
    // sum_l (W_l)_l relative to -Lap + W^2.
    const Index m = sys.size();
    CMatrix a = -laplacian(sys.grid).matrix;
    CMatrix div = CMatrix::Zero(m, m);
    for (Index p = 0; p < m; ++p) {
      const auto x = sys.grid.point(p);
      const std::span<const double> xs(x.data(), std::size_t(sys.grid.dim()));
      double w2 = 0.0, dsum = 0.0;
      for (int l = 0; l < sys.grid.dim(); ++l) {
        w2 += sys.drift(p, l) * sys.drift(p, l);
        dsum += sys.field.derivative(l, l, xs);
      }
      a(p, p) += w2;
      div(p, p) = dsum;
    }
    add(relative_bound(a, div, options.offsets, sys.grid, "div W vs -Lap + W^2"));
  }

  const bool c_ok = rep.condition("c").status == CFStatus::Pass;
  const bool d_ok = rep.condition("d").status == CFStatus::Pass;
  if (!(c_ok && d_ok && e_ok)) {
    rep.verdict = "not supported";
  } else {
    rep.verdict = trend ? "supported" : "inconclusive";
  }
  return rep;
}

C4FormBound c4_form_bound(const LindbladSystem& sys) {
  const int d = sys.grid.dim();
  const SampleBox box = SampleBox::from_grid(sys.grid);
  const ConditionEntry c4 = check_c4(sys.field, box);
  C4FormBound out;
  out.c4 = c4.constant.value_or(0.0);
  out.growth_violation = c4.growth_violation;
  out.margin = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (Index p = 0; p < sys.size(); ++p) {
    const auto x = sys.grid.point(p);
    const std::span<const double> xs(x.data(), std::size_t(d));
    double f = 0.0, w2 = 0.0;
    for (int l = 0; l < d; ++l) {
      w2 += sys.drift(p, l) * sys.drift(p, l);
      for (int k = 0; k < d; ++k) {
        // (W_k)_l = dW_k / dx_l
        f -= 4.0 * sys.drift(p, l) * sys.field.derivative(k, l, xs) * sys.drift(p, k);
      }
    }
    const double bound = 4.0 * out.c4 * w2;
    scale = std::max(scale, bound);
    if (bound - f < out.margin) {
      out.margin = bound - f;
      out.witness_point.assign(x.begin(), x.begin() + d);
    }
  }
  out.holds = out.margin >= -1e-10 * (1.0 + scale);
  return out;
}

}  // namespace qdslab
