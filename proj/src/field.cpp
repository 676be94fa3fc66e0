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

#include "qdslab/field.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace qdslab {

// ---------------------------------------------------------------------------
// PolynomialPotential

PolynomialPotential::PolynomialPotential(int dim, std::vector<std::pair<MultiIndex, double>> terms)
    : dim_(dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "potential dimension must be >= 1");
  for (auto& [exponents, coeff] : terms) {
    if (int(exponents.size()) != dim) {
      throw Error(ErrorKind::Dimension, "potential term has " + std::to_string(exponents.size()) +
                                            " exponents, expected " + std::to_string(dim));
    }
    if (std::any_of(exponents.begin(), exponents.end(), [](int e) { return e < 0; })) {
      throw Error(ErrorKind::InvalidArgument, "potential exponents must be non-negative");
    }
    if (!std::isfinite(coeff)) throw Error(ErrorKind::InvalidArgument, "non-finite coefficient");
    if (coeff == 0.0) continue;
    terms_[exponents] += coeff;
  }
  std::erase_if(terms_, [](const auto& kv) { return kv.second == 0.0; });

  for (const auto& [e, c] : terms_) {
    degree_ = std::max(degree_, std::accumulate(e.begin(), e.end(), 0));
  }
  if (degree_ < 2 || degree_ % 2 != 0) {
    throw Error(ErrorKind::InvalidArgument,
                "potential must have even leading degree 2n >= 2, got " + std::to_string(degree_));
  }
  for (int l = 0; l < dim; ++l) {
    MultiIndex pure(dim, 0);
    pure[l] = degree_;
    auto it = terms_.find(pure);
    if (it == terms_.end() || !(it->second > 0.0)) {
      throw Error(ErrorKind::InvalidArgument,
                  "leading coefficient of x_" + std::to_string(l + 1) + "^" +
                      std::to_string(degree_) + " must be positive");
    }
  }
  for (const auto& [e, c] : terms_) {
    const int deg = std::accumulate(e.begin(), e.end(), 0);
    const bool pure = std::count(e.begin(), e.end(), 0) == dim - 1;
    if (deg == degree_ && !pure) {
      throw Error(ErrorKind::InvalidArgument,
                  "mixed terms must have total degree <= " + std::to_string(degree_ - 1));
    }
  }
}

double PolynomialPotential::operator()(std::span<const double> x) const {
  return derivative(MultiIndex(dim_, 0), x);
}

double PolynomialPotential::derivative(const MultiIndex& orders, std::span<const double> x) const {
  double total = 0.0;
  for (const auto& [e, c] : terms_) {
    double term = c;
    for (int a = 0; a < dim_ && term != 0.0; ++a) {
      const int o = orders[a];
      if (e[a] < o) {
        term = 0.0;
        break;
      }
      for (int f = 0; f < o; ++f) term *= double(e[a] - f);
      const int p = e[a] - o;
      for (int q = 0; q < p; ++q) term *= x[a];
    }
    total += term;
  }
  return total;
}

std::string PolynomialPotential::describe() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [e, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (int a = 0; a < dim_; ++a)
      if (e[a] > 0) os << "*x" << a + 1 << "^" << e[a];
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// VectorField

std::string to_string(FieldProvenance p) {
  switch (p) {
    case FieldProvenance::GradientOfPotential: return "gradient-of-potential";
    case FieldProvenance::Tabulated: return "tabulated";
    case FieldProvenance::Analytic: return "analytic";
  }
  return "analytic";
}

VectorField::VectorField(int dim, FieldProvenance provenance, ValueFn value, FirstFn first,
                         SecondFn second, std::string description)
    : dim_(dim),
      provenance_(provenance),
      value_(std::move(value)),
      first_(std::move(first)),
      second_(std::move(second)),
      description_(std::move(description)) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "field dimension must be >= 1");
  if (!value_ || !first_) {
    throw Error(ErrorKind::InvalidArgument, "field needs value and first-derivative evaluators");
  }
}

double VectorField::second_derivative(int l, int j, int k, std::span<const double> x) const {
  if (!second_) throw Error(ErrorKind::InvalidArgument, "field has no second derivatives");
  return second_(l, j, k, x);
}

double VectorField::norm(std::span<const double> x) const {
  double s = 0.0;
  for (int l = 0; l < dim_; ++l) {
    const double v = value(l, x);
    s += v * v;
  }
  return std::sqrt(s);
}

VectorField grad_potential(const PolynomialPotential& potential) {
  auto v = std::make_shared<const PolynomialPotential>(potential);
  const int d = v->dim();
  auto value = [v, d](int l, std::span<const double> x) {
    MultiIndex o(d, 0);
    o[l] += 1;
    return 0.25 * v->derivative(o, x);
  };
  auto first = [v, d](int l, int k, std::span<const double> x) {
    MultiIndex o(d, 0);
    o[l] += 1;
    o[k] += 1;
    return 0.25 * v->derivative(o, x);
  };
  auto second = [v, d](int l, int j, int k, std::span<const double> x) {
    MultiIndex o(d, 0);
    o[l] += 1;
    o[j] += 1;
    o[k] += 1;
    return 0.25 * v->derivative(o, x);
  };
  return VectorField(d, FieldProvenance::GradientOfPotential, value, first, second,
                     "grad(V)/4, V = " + v->describe());
}

VectorField analytic_field(int dim, VectorField::ValueFn value, VectorField::FirstFn first,
                           VectorField::SecondFn second, std::string description) {
  return VectorField(dim, FieldProvenance::Analytic, std::move(value), std::move(first),
                     std::move(second), std::move(description));
}

namespace {

// Derivative tables of a lattice function along one axis: centered in the
// interior, second-order one-sided at the two ends.
RVector axis_difference(const GridSpec& g, const RVector& f, int axis) {
  const int n = g.points();
  const double h = g.spacing();
  RVector out(f.size());
  for (Index p = 0; p < f.size(); ++p) {
    auto ij = g.axis_indices(p);
    const int i = ij[axis];
    const Index stride = (g.dim() == 2 && axis == 0) ? Index(n) : Index(1);
    if (i == 0) {
      out(p) = (-3.0 * f(p) + 4.0 * f(p + stride) - f(p + 2 * stride)) / (2.0 * h);
    } else if (i == n - 1) {
      out(p) = (3.0 * f(p) - 4.0 * f(p - stride) + f(p - 2 * stride)) / (2.0 * h);
    } else {
      out(p) = (f(p + stride) - f(p - stride)) / (2.0 * h);
    }
  }
  return out;
}

struct Table {
  GridSpec grid;
  std::vector<RVector> value;   // [l]
  std::vector<RVector> first;   // [l * d + k]
  std::vector<RVector> second;  // [(l * d + j) * d + k]

  double interpolate(const RVector& t, std::span<const double> x) const {
    const int n = grid.points();
    const double h = grid.spacing();
    const double r = grid.half_width();
    std::array<int, 2> lo{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    for (int a = 0; a < grid.dim(); ++a) {
      const double s = std::clamp((x[a] + r) / h, 0.0, double(n - 1));
      lo[a] = std::min(int(std::floor(s)), n - 2);
      frac[a] = s - lo[a];
    }
    if (grid.dim() == 1) return (1.0 - frac[0]) * t(lo[0]) + frac[0] * t(lo[0] + 1);
    auto at = [&](int i, int j) { return t(Index(i) * n + j); };
    return (1.0 - frac[0]) * ((1.0 - frac[1]) * at(lo[0], lo[1]) + frac[1] * at(lo[0], lo[1] + 1)) +
           frac[0] * ((1.0 - frac[1]) * at(lo[0] + 1, lo[1]) + frac[1] * at(lo[0] + 1, lo[1] + 1));
  }
};

}  // namespace

VectorField tabulated_field(const GridSpec& grid, const RMatrix& values) {
  const int d = grid.dim();
  if (values.rows() != grid.size() || values.cols() != d) {
    throw Error(ErrorKind::Dimension, "tabulated field must be M x d");
  }
  if (!values.allFinite()) throw Error(ErrorKind::InvalidArgument, "tabulated field is not finite");
  auto t = std::make_shared<Table>(Table{grid, {}, {}, {}});
  for (int l = 0; l < d; ++l) t->value.push_back(values.col(l));
  for (int l = 0; l < d; ++l)
    for (int k = 0; k < d; ++k) t->first.push_back(axis_difference(grid, t->value[l], k));
  for (int l = 0; l < d; ++l)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        t->second.push_back(axis_difference(grid, t->first[l * d + j], k));

  auto value = [t](int l, std::span<const double> x) { return t->interpolate(t->value[l], x); };
  auto first = [t, d](int l, int k, std::span<const double> x) {
    return t->interpolate(t->first[l * d + k], x);
  };
  auto second = [t, d](int l, int j, int k, std::span<const double> x) {
    return t->interpolate(t->second[(l * d + j) * d + k], x);
  };
  return VectorField(d, FieldProvenance::Tabulated, value, first, second,
                     "tabulated on " + grid.describe());
}

VectorField read_tabulated_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open tabulated field " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (!ls.eof()) throw Error(ErrorKind::Io, "malformed row in " + path + ": " + line);
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorKind::Io, "tabulated field " + path + " is empty");
  const std::size_t cols = rows.front().size();
  if (cols != 2 && cols != 4) {
    throw Error(ErrorKind::Io, "tabulated field rows need 2 (d=1) or 4 (d=2) columns");
  }
  const int d = int(cols / 2);
  for (const auto& r : rows)
    if (r.size() != cols) throw Error(ErrorKind::Io, "ragged tabulated field " + path);
  int n = int(rows.size());
  if (d == 2) {
    n = int(std::lround(std::sqrt(double(rows.size()))));
    if (std::size_t(n) * std::size_t(n) != rows.size()) {
      throw Error(ErrorKind::Io, "d=2 tabulated field needs N^2 rows");
    }
  }
  const double r = -rows.front()[0];
  GridSpec grid(d, r, n, 1);
  RMatrix values(grid.size(), d);
  for (Index p = 0; p < grid.size(); ++p) {
    auto x = grid.point(p);
    for (int a = 0; a < d; ++a) {
      if (std::abs(rows[p][a] - x[a]) > 1e-9 * (1.0 + r)) {
        throw Error(ErrorKind::Io, "tabulated field row " + std::to_string(p) +
                                       " is not on the expected uniform lattice");
      }
    }
    for (int l = 0; l < d; ++l) values(p, l) = rows[p][d + l];
  }
  return tabulated_field(grid, values);
}

// ---------------------------------------------------------------------------
// Sampling and checkers

SampleBox SampleBox::from_grid(const GridSpec& grid) {
  return SampleBox{grid.dim(), grid.half_width(), grid.points(), 8};
}

std::size_t SampleBox::size() const {
  if (points <= 0) return 0;
  return dim == 1 ? std::size_t(points) : std::size_t(points) * std::size_t(points);
}

std::array<double, 2> SampleBox::point(std::size_t flat) const {
  const double h = points > 1 ? 2.0 * half_width / (points - 1) : 0.0;
  if (dim == 1) return {-half_width + double(flat) * h, 0.0};
  return {-half_width + double(flat / points) * h, -half_width + double(flat % points) * h};
}

double SampleBox::radius(std::size_t flat) const {
  auto p = point(flat);
  return dim == 1 ? std::abs(p[0]) : std::max(std::abs(p[0]), std::abs(p[1]));
}

std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::SatisfiedOnBox: return "satisfied-on-box";
    case ConditionStatus::Violated: return "violated";
    case ConditionStatus::AssumedByConstruction: return "assumed-by-construction";
  }
  return "violated";
}

const ConditionEntry& AssumptionReport::entry(const std::string& condition) const {
  for (const auto& e : entries)
    if (e.condition == condition) return e;
  throw Error(ErrorKind::InvalidArgument, "no entry for condition " + condition);
}

bool AssumptionReport::all_satisfied() const {
  return std::none_of(entries.begin(), entries.end(),
                      [](const auto& e) { return e.status == ConditionStatus::Violated; });
}

std::vector<double> default_eps_list() { return {0.1, 0.25, 0.5, 0.75, 0.9}; }
std::vector<double> default_c1_list() { return {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}; }

namespace detail {

GrowthScan scan_growth(const SampleBox& box, std::span<const double> values) {
  GrowthScan out;
  const int shells = std::max(box.shells, 3);
  out.running_max.assign(std::size_t(shells), -std::numeric_limits<double>::infinity());
  out.max = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double r = box.radius(i);
    int s = int(std::ceil(shells * r / box.half_width - 1e-12)) - 1;
    s = std::clamp(s, 0, shells - 1);
    out.running_max[std::size_t(s)] = std::max(out.running_max[std::size_t(s)], values[i]);
    if (values[i] > out.max) {
      out.max = values[i];
      out.argmax = i;
    }
  }
  for (int s = 1; s < shells; ++s)
    out.running_max[s] = std::max(out.running_max[s], out.running_max[s - 1]);
  const auto& m = out.running_max;
  const std::size_t n = m.size();
  out.increasing_at_edge = m[n - 1] > m[n - 2] && m[n - 2] > m[n - 3];
  return out;
}

}  // namespace detail

namespace {

void require_samples(const SampleBox& box) {
  if (box.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty sample set");
  if (!(box.half_width > 0.0)) throw Error(ErrorKind::InvalidArgument, "degenerate sample box");
  if (box.dim != 1 && box.dim != 2) {
    throw Error(ErrorKind::Dimension, "sample box dimension must be 1 or 2");
  }
}

double finite_or_throw(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorKind::Numerical, std::string("non-finite ") + what);
  return v;
}

std::vector<double> point_vector(const SampleBox& box, std::size_t i) {
  auto p = box.point(i);
  return {p.begin(), p.begin() + box.dim};
}

struct FieldSamples {
  std::vector<double> norm;         // |W|
  std::vector<double> max_first;    // max_{l,k} |(W_l)_k|
  std::vector<double> max_second;   // max_{l,j,k} |(W_l)_{jk}|
};

FieldSamples sample_field(const VectorField& w, const SampleBox& box, bool need_second) {
  const int d = w.dim();
  FieldSamples s;
  const std::size_t n = box.size();
  s.norm.resize(n);
  s.max_first.resize(n);
  if (need_second) s.max_second.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto p = box.point(i);
    std::span<const double> x(p.data(), std::size_t(d));
    s.norm[i] = finite_or_throw(w.norm(x), "field value");
    double m1 = 0.0;
    for (int l = 0; l < d; ++l)
      for (int k = 0; k < d; ++k)
        m1 = std::max(m1, std::abs(finite_or_throw(w.derivative(l, k, x), "field derivative")));
    s.max_first[i] = m1;
    if (need_second) {
      double m2 = 0.0;
      for (int l = 0; l < d; ++l)
        for (int j = 0; j < d; ++j)
          for (int k = 0; k < d; ++k)
            m2 = std::max(m2, std::abs(finite_or_throw(w.second_derivative(l, j, k, x),
                                                       "field second derivative")));
      s.max_second[i] = m2;
    }
  }
  return s;
}

void check_dims(const VectorField& w, const SampleBox& box) {
  require_samples(box);
  if (w.dim() != box.dim) throw Error(ErrorKind::Dimension, "field and sample box dimensions differ");
}

}  // namespace

ConditionEntry check_c1(const VectorField& w, const SampleBox& box) {
  check_dims(w, box);
  ConditionEntry e;
  e.condition = "C-1";
  if (w.provenance() != FieldProvenance::Tabulated) {
    e.status = ConditionStatus::AssumedByConstruction;
    e.note = w.provenance() == FieldProvenance::GradientOfPotential
                 ? "polynomial field, C^infinity"
                 : "closed-form evaluators supplied";
    return e;
  }
  // Tabulated: compare centered differences at steps h and 2h.
  const int d = w.dim();
  const double h = 2.0 * box.half_width / (box.points - 1);
  double worst = 0.0;
  double scale = 0.0;
  std::size_t worst_at = 0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    auto p = box.point(i);
    std::span<const double> x(p.data(), std::size_t(d));
    for (int l = 0; l < d; ++l) {
      for (int k = 0; k < d; ++k) {
        if (std::abs(p[k]) > box.half_width - 2.0 * h - 1e-12) continue;
        auto shifted = [&](double delta) {
          auto q = p;
          q[k] += delta;
          return w.value(l, std::span<const double>(q.data(), std::size_t(d)));
        };
        const double dh = (shifted(h) - shifted(-h)) / (2.0 * h);
        const double d2h = (shifted(2.0 * h) - shifted(-2.0 * h)) / (4.0 * h);
        finite_or_throw(w.second_derivative(l, k, k, x), "second difference");
        scale = std::max(scale, std::abs(dh));
        if (std::abs(dh - d2h) > worst) {
          worst = std::abs(dh - d2h);
          worst_at = i;
        }
      }
    }
  }
  e.constant = worst;
  if (worst > 0.05 * (1.0 + scale)) {
    e.status = ConditionStatus::Violated;
    e.witnesses.push_back({point_vector(box, worst_at), worst});
    e.note = "finite-difference derivatives at h and 2h disagree";
  } else {
    e.note = "finite-difference consistency at h and 2h";
  }
  return e;
}

ConditionEntry check_c2(const VectorField& w, const SampleBox& box, std::span<const double> eps_list) {
  check_dims(w, box);
  if (eps_list.empty()) throw Error(ErrorKind::InvalidArgument, "C-2 needs at least one epsilon");
  for (double eps : eps_list) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::InvalidArgument, "epsilon must lie in (0,1)");
  }
  const FieldSamples s = sample_field(w, box, false);
  ConditionEntry e;
  e.condition = "C-2";
  std::vector<double> sorted(eps_list.begin(), eps_list.end());
  std::sort(sorted.begin(), sorted.end());
  bool every_grows = true;
  std::vector<double> q(box.size());
  std::size_t witness = 0;
  for (double eps : sorted) {
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = s.max_first[i] - eps * s.norm[i];
    auto scan = detail::scan_growth(box, q);
    e.constants.emplace_back(eps, std::max(0.0, scan.max));
    every_grows = every_grows && scan.increasing_at_edge;
    witness = scan.argmax;
  }
  if (every_grows) {
    e.status = ConditionStatus::Violated;
    e.growth_violation = true;
    e.witnesses.push_back({point_vector(box, witness), s.max_first[witness]});
    e.note = "growth-violation: |(W_l)_k| - eps|W| increases on the outermost shells for every eps";
  }
  return e;
}

ConditionEntry check_c3(const VectorField& w, const SampleBox& box, std::span<const double> c1_list) {
  check_dims(w, box);
  if (!w.has_second_derivatives()) {
    throw Error(ErrorKind::InvalidArgument, "C-3 needs second derivatives");
  }
  if (c1_list.empty()) throw Error(ErrorKind::InvalidArgument, "C-3 needs at least one c1");
  const FieldSamples s = sample_field(w, box, true);
  ConditionEntry e;
  e.condition = "C-3";
  std::vector<double> sorted(c1_list.begin(), c1_list.end());
  std::sort(sorted.begin(), sorted.end());
  bool every_grows = true;
  std::vector<double> q(box.size());
  std::size_t witness = 0;
  for (double c1 : sorted) {
    if (c1 < 0.0) throw Error(ErrorKind::InvalidArgument, "c1 must be non-negative");
    for (std::size_t i = 0; i < q.size(); ++i) q[i] = s.max_second[i] - c1 * s.norm[i];
    auto scan = detail::scan_growth(box, q);
    const double c2 = std::max(0.0, scan.max);
    // Pareto front: keep a pair only if it lowers c2.
    if (e.constants.empty() || c2 < e.constants.back().second) e.constants.emplace_back(c1, c2);
    every_grows = every_grows && scan.increasing_at_edge;
    witness = scan.argmax;
  }
  if (every_grows) {
    e.status = ConditionStatus::Violated;
    e.growth_violation = true;
    e.witnesses.push_back({point_vector(box, witness), s.max_second[witness]});
    e.note = "growth-violation: |(W_l)_jk| - c1|W| increases on the outermost shells for every c1";
  }
  return e;
}

ConditionEntry check_c4(const VectorField& w, const SampleBox& box) {
  check_dims(w, box);
  const int d = w.dim();
  std::vector<double> q(box.size());
  RMatrix jac(d, d);
  for (std::size_t i = 0; i < box.size(); ++i) {
    auto p = box.point(i);
    std::span<const double> x(p.data(), std::size_t(d));
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) jac(k, l) = finite_or_throw(w.derivative(l, k, x), "Jacobian");
    const RMatrix sym = 0.5 * (jac + jac.transpose());
    Eigen::SelfAdjointEigenSolver<RMatrix> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error(ErrorKind::Numerical, "Jacobian eigensolve failed");
    q[i] = -es.eigenvalues()(0);
  }
  auto scan = detail::scan_growth(box, q);
  ConditionEntry e;
  e.condition = "C-4";
  e.constant = std::max(0.0, scan.max);
  if (scan.increasing_at_edge && scan.max > 0.0) {
    e.status = ConditionStatus::Violated;
    e.growth_violation = true;
    e.witnesses.push_back({point_vector(box, scan.argmax), -scan.max});
    e.note = "growth-violation: lambda_min of the symmetric Jacobian keeps falling toward the box edge";
  }
  return e;
}

AssumptionReport check_assumptions(const VectorField& w, const SampleBox& box,
                                   std::span<const double> eps_list,
                                   std::span<const double> c1_list) {
  AssumptionReport r;
  r.box = box;
  r.field = w.description();
  r.entries.push_back(check_c1(w, box));
  r.entries.push_back(check_c2(w, box, eps_list));
  r.entries.push_back(check_c3(w, box, c1_list));
  r.entries.push_back(check_c4(w, box));
  return r;
}

}  // namespace qdslab
