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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qdslab/field.hpp"
#include "qdslab/grid.hpp"
#include "qdslab/io.hpp"
#include "qdslab/semigroup.hpp"

namespace qdslab::cli {

enum ExitStatus : int {
  kOk = 0,
  kConfigError = 1,         // parse failure, unknown key, dimension cap
  kInvariantViolated = 2,   // a hard property failed; diagnostics kept
  kNumericalFailure = 3,    // overflow, divergence, non-convergence
};

inline constexpr int kSchemaVersion = 1;
inline constexpr int kMaxPoints1d = 256;
inline constexpr int kMaxPoints2d = 24;

struct RunConfig {
  // field: exactly one of terms / tabulated
  std::vector<std::pair<MultiIndex, double>> terms;
  std::filesystem::path tabulated;

  GridSpec grid{1, 6.0, 32, 3};

  TimeGrid time{0.5, 64};
  PicardOptions picard;

  double shift = 1.0;
  std::set<std::string> analyses;
  std::filesystem::path output_dir;
  std::uint64_t seed = 0;
  bool dump_nodes = false;

  // check-field
  std::optional<SampleBox> sampling;  // defaults to the grid lattice
  std::vector<double> eps_list = default_eps_list();
  std::vector<double> c1_list = default_c1_list();

  // verify
  std::vector<int> resolutions;  // empty: N and its refinement
  std::vector<double> offsets{10.0};
  std::vector<double> commutator_eps{0.25, 0.5, 1.0};

  // classical
  double classical_variance = 0.5;

  // choi
  std::vector<double> choi_times{0.05, 0.1};
  std::optional<double> choi_dt;

  VectorField make_field() const;
};

/// Strict parse: unknown keys, wrong types and out-of-range values throw
/// Error(InvalidArgument) or Error(Dimension). Relative paths in the field
/// section resolve against `base_dir`.
RunConfig parse_config(const io::Json& doc, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

struct RunOutcome {
  int status = kOk;
  std::filesystem::path manifest;
  std::vector<std::string> diagnostics;
};

/// Executes the toggled analyses and writes artifacts plus manifest.json into
/// cfg.output_dir. Progress lines go to `log`.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

/// Loads and runs a config file; config problems map to kConfigError.
RunOutcome run_file(const std::filesystem::path& config, std::ostream& log);

/// Plain-text summary of a manifest. Returns 0 unless the manifest itself
/// cannot be read (1); broken artifacts are reported per item.
int report(const std::filesystem::path& manifest, std::ostream& out);

}  // namespace qdslab::cli
