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

#include <string>
#include <vector>

#include "qdslab/common.hpp"
#include "qdslab/field.hpp"
#include "qdslab/lindblad.hpp"

namespace qdslab {

/// Optimal constant of a quadratic-form inequality, read off a Hermitian
/// pencil restricted to the bulk subspace.
struct PencilEstimate {
  std::string label;
  double constant = 0.0;   // a, c~(eps) or k
  double offset = 0.0;     // companion additive constant (a*b for relative bounds)
  double parameter = 0.0;  // sampled b or eps
  std::string pencil;      // which forms were compared
  std::string subspace;    // "full" or "bulk(w)"
  int bulk_width = 0;
  int resolution = 0;      // points per axis
  CVector witness;         // extremal vector, embedded in the full lattice
  double witness_quotient = 0.0;  // defining Rayleigh quotient at the witness
};

/// Smallest a with B^*B <= a (A^*A + b I) on bulk vectors, for each sampled b:
/// the largest generalized eigenvalue of (B^*B, A^*A + b I). The reported
/// offset a*b is the additive constant in |Bu|^2 <= a|Au|^2 + a b |u|^2.
/// Throws InvalidArgument when b <= 0.
std::vector<PencilEstimate> relative_bound(const CMatrix& a, const CMatrix& b,
                                           const std::vector<double>& offsets,
                                           const GridSpec& grid, const std::string& label = "");

/// K_+- = +-i(A^*B - B^*A); for each eps returns max(0, lambda_max(K_+- - eps A^*A))
/// on bulk vectors, i.e. the smallest c with +-i(<Au,Bu> - <Bu,Au>) <= eps|Au|^2 + c|u|^2.
/// Results are ordered by eps, '+' before '-'.
std::vector<PencilEstimate> commutator_bound(const CMatrix& a, const CMatrix& b,
                                             const std::vector<double>& eps_list,
                                             const GridSpec& grid, const std::string& label = "");

enum class CFStatus { Pass, Fail, Informational };

std::string to_string(CFStatus s);

struct CFCondition {
  std::string condition;  // "a" .. "e"
  CFStatus status = CFStatus::Informational;
  double value = 0.0;
  std::string evidence;
};

struct CFResolution {
  int points = 0;
  double k = 0.0;
  double c_norm = 0.0;  // |C|_2 on the bulk subspace
  PencilEstimate estimate;
};

struct CFReport {
  std::string field;
  GridSpec grid;
  double shift = 0.0;
  std::vector<CFCondition> conditions;
  std::vector<CFResolution> resolutions;
  double k = 0.0;            // at the system's own resolution
  double drift = 0.0;        // max relative change of k between resolutions
  double b8 = 0.0;           // = k
  double b9_over_b8 = 0.0;   // implied shift: lambda_max(M - k Phi) / k
  std::vector<PencilEstimate> bounds;  // auxiliary relative/commutator bounds
  std::string verdict;       // "supported" | "not supported" | "inconclusive"

  const CFCondition& condition(const std::string& name) const;
};

struct CFOptions {
  std::vector<int> resolutions;  // points per axis; the system's own N is always included
  double drift_tolerance = 0.10;
  bool auxiliary_bounds = true;  // H vs G0, commutator [G0, H], sum (W_l)_l vs -Lap + W^2
  std::vector<double> offsets{10.0};
  std::vector<double> eps_list{0.25, 0.5, 1.0};
};

/// Chebotarev-Fagnola sufficient conditions on the assembled system.
///   (a), (b): informational in finite dimension.
///   (c): max |G + G^* + Phi| <= 1e-12 (1 + |Phi|_max).
///   (d): C - Phi equals shift * I entrywise, hence lambda_min(C - Phi) = shift.
///   (e): k = max(0, lambda_max) of the pencil (sym(CG + G^*C + sum L^*CL), C)
///        on bulk vectors, at every resolution, with its relative drift.
CFReport cf_check(const LindbladSystem& sys, const CFOptions& options = {});

/// |k2 - k1| / max(k1, k2); zero when both values sit below `floor`.
double relative_drift(double k1, double k2, double floor);

struct C4FormBound {
  double c4 = 0.0;
  double margin = 0.0;  // min over lattice of 4 c4 W^2 - F
  std::vector<double> witness_point;
  bool holds = false;   // margin >= -1e-10 (1 + max 4 c4 W^2)
  bool growth_violation = false;
};

/// Diagonal form F = -4 sum_{l,k} W_l (W_k)_l W_k against 4 c4 W^2 on the lattice,
/// with c4 from check_c4 on the same lattice.
C4FormBound c4_form_bound(const LindbladSystem& sys);

}  // namespace qdslab
