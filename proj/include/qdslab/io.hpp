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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdslab/common.hpp"
#include "qdslab/field.hpp"
#include "qdslab/grid.hpp"
#include "qdslab/semigroup.hpp"
#include "qdslab/verifier.hpp"

namespace qdslab::io {

using Json = nlohmann::ordered_json;

/// Matrix Market coordinate file, complex general, 1-based, exact zeros
/// skipped. Grid metadata goes into `% qdslab ...` comment lines.
void write_matrix_market(const std::filesystem::path& path, const DiscreteOperator& op,
                         const std::string& role);

struct MatrixMarketFile {
  CMatrix matrix;
  std::vector<std::string> comments;  // without the leading '%'
};

/// Reads coordinate real/complex files with general, symmetric or hermitian
/// symmetry. Throws Io on malformed input.
MatrixMarketFile read_matrix_market(const std::filesystem::path& path);

/// Long-format time series: iteration, node_time, metric, value.
class CsvSeries {
 public:
  void add(int iteration, double node_time, const std::string& metric, double value);
  void write(const std::filesystem::path& path) const;
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  struct Row {
    int iteration;
    double node_time;
    std::string metric;
    double value;
  };
  std::vector<Row> rows_;
};

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Plain-text column dump: index, coordinates, Re, Im.
void write_witness(const std::filesystem::path& path, const CVector& v, const GridSpec& grid);

/// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

Json to_json(const GridSpec& grid);
Json to_json(const ConditionEntry& entry);
Json to_json(const AssumptionReport& report);
Json to_json(const PencilEstimate& estimate);
Json to_json(const CFReport& report);
Json to_json(const C4FormBound& bound);
Json to_json(const ChoiReport& report);
Json to_json(const ClassicalComparison& cmp);

}  // namespace qdslab::io
