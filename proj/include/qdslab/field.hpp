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

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qdslab/common.hpp"
#include "qdslab/grid.hpp"

namespace qdslab {

using MultiIndex = std::vector<int>;

/// V(x) = sum_l a_l x_l^{2n} + Q(x) with a_l > 0 and deg Q <= 2n - 1.
class PolynomialPotential {
 public:
  /// Throws InvalidArgument unless the leading structure above holds.
  PolynomialPotential(int dim, std::vector<std::pair<MultiIndex, double>> terms);

  int dim() const noexcept { return dim_; }
  int degree() const noexcept { return degree_; }
  const std::map<MultiIndex, double>& terms() const noexcept { return terms_; }

  double operator()(std::span<const double> x) const;
  /// Mixed partial derivative; `orders[l]` differentiations along axis l.
  double derivative(const MultiIndex& orders, std::span<const double> x) const;
  std::string describe() const;

 private:
  int dim_;
  int degree_ = 0;
  std::map<MultiIndex, double> terms_;
};

enum class FieldProvenance { GradientOfPotential, Tabulated, Analytic };

std::string to_string(FieldProvenance p);

/// Drift W = (W_1, ..., W_d) with first and second derivative evaluators.
///
/// Indices are 0-based: derivative(l, k, x) is (W_l)_k = dW_l/dx_k and
/// second_derivative(l, j, k, x) is (W_l)_{jk}.
class VectorField {
 public:
  using ValueFn = std::function<double(int l, std::span<const double> x)>;
  using FirstFn = std::function<double(int l, int k, std::span<const double> x)>;
  using SecondFn = std::function<double(int l, int j, int k, std::span<const double> x)>;

  VectorField(int dim, FieldProvenance provenance, ValueFn value, FirstFn first,
              SecondFn second, std::string description);

  int dim() const noexcept { return dim_; }
  FieldProvenance provenance() const noexcept { return provenance_; }
  bool has_second_derivatives() const noexcept { return bool(second_); }
  const std::string& description() const noexcept { return description_; }

  double value(int l, std::span<const double> x) const { return value_(l, x); }
  double derivative(int l, int k, std::span<const double> x) const { return first_(l, k, x); }
  double second_derivative(int l, int j, int k, std::span<const double> x) const;
  /// |W| = (sum_l W_l^2)^{1/2}.
  double norm(std::span<const double> x) const;

 private:
  int dim_;
  FieldProvenance provenance_;
  ValueFn value_;
  FirstFn first_;
  SecondFn second_;
  std::string description_;
};

/// W = (1/4) grad V with exact polynomial derivatives.
VectorField grad_potential(const PolynomialPotential& potential);

/// Field from user-supplied closures (used for fields outside the polynomial family).
VectorField analytic_field(int dim, VectorField::ValueFn value, VectorField::FirstFn first,
                           VectorField::SecondFn second, std::string description);

/// Field tabulated on a lattice. `values` is M x d in the grid's flat order.
/// Derivatives are centered differences of the table; off-lattice points use
/// multilinear interpolation.
VectorField tabulated_field(const GridSpec& grid, const RMatrix& values);

/// Reads a whitespace-separated table with columns `x [y] W_1 [W_2]`, one row
/// per lattice point in flat order. Lines starting with '#' are skipped.
VectorField read_tabulated_field(const std::string& path);

/// Sampling lattice for the assumption checkers.
struct SampleBox {
  int dim = 1;
  double half_width = 6.0;
  int points = 64;  // per axis
  int shells = 8;   // nested sup-norm shells for the growth heuristic

  static SampleBox from_grid(const GridSpec& grid);
  std::size_t size() const;
  std::array<double, 2> point(std::size_t flat) const;
  double radius(std::size_t flat) const;  // sup-norm distance from the origin
};

enum class ConditionStatus { SatisfiedOnBox, Violated, AssumedByConstruction };

std::string to_string(ConditionStatus s);

struct Witness {
  std::vector<double> point;
  double value = 0.0;
};

struct ConditionEntry {
  std::string condition;  // "C-1" .. "C-4"
  ConditionStatus status = ConditionStatus::SatisfiedOnBox;
  bool growth_violation = false;
  /// (eps, c(eps)) for C-2, Pareto (c1, c2) for C-3.
  std::vector<std::pair<double, double>> constants;
  /// c4 for C-4.
  std::optional<double> constant;
  std::vector<Witness> witnesses;
  std::string note;
};

struct AssumptionReport {
  SampleBox box;
  std::string field;
  std::vector<ConditionEntry> entries;

  const ConditionEntry& entry(const std::string& condition) const;
  bool all_satisfied() const;
};

std::vector<double> default_eps_list();
std::vector<double> default_c1_list();

ConditionEntry check_c1(const VectorField& w, const SampleBox& box);
ConditionEntry check_c2(const VectorField& w, const SampleBox& box, std::span<const double> eps_list);
ConditionEntry check_c3(const VectorField& w, const SampleBox& box, std::span<const double> c1_list);
ConditionEntry check_c4(const VectorField& w, const SampleBox& box);

AssumptionReport check_assumptions(const VectorField& w, const SampleBox& box,
                                   std::span<const double> eps_list,
                                   std::span<const double> c1_list);

namespace detail {

struct GrowthScan {
  bool increasing_at_edge = false;
  std::size_t argmax = 0;
  double max = 0.0;
  std::vector<double> running_max;  // per shell
};

/// Running maxima of `values` over nested shells of the box. Flags growth when
/// the last three running maxima are strictly increasing.
GrowthScan scan_growth(const SampleBox& box, std::span<const double> values);

}  // namespace detail

}  // namespace qdslab
