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


#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qdslab/cli.hpp"

using namespace qdslab;
namespace fs = std::filesystem;
using io::Json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "qdslab_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Json base_config() {
  return Json::parse(R"({
    "schema_version": 1,
    "field": {"terms": [{"exponents": [2], "coeff": 2.0}]},
    "grid": {"d": 1, "R": 4.0, "N": 16},
    "time": {"T": 0.2, "steps": 16},
    "analyses": ["assemble", "evolve"],
    "output_dir": "out",
    "seed": 3
  })");
}

int parse_error_kind(const Json& doc) {
  try {
    cli::parse_config(doc, ".");
  } catch (const Error& e) {
    return int(e.kind());
  }
  return -1;
}

cli::RunOutcome run_in(const fs::path& dir, const Json& doc) {
  io::write_json(dir / "config.json", doc);
  std::ostringstream log;
  return cli::run_file(dir / "config.json", log);
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = cli::parse_config(base_config(), "/base");
  CHECK(cfg.grid.points() == 16);
  CHECK(cfg.time.steps() == 16);
  CHECK(cfg.output_dir == fs::path("/base/out"));
  CHECK(cfg.analyses.count("evolve") == 1);
  CHECK(cfg.seed == 3);

  Json doc = base_config();
  doc["bogus"] = 1;
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc["grid"]["spacing"] = 0.1;
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc["analyses"] = Json::array();
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc["analyses"] = {"evolve", "dance"};
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc["schema_version"] = 2;
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc.erase("output_dir");
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));

  doc = base_config();
  doc["grid"]["N"] = 300;
  CHECK(parse_error_kind(doc) == int(ErrorKind::Dimension));

  doc = base_config();
  doc["grid"] = {{"d", 2}, {"R", 2.0}, {"N", 30}};
  doc["field"]["terms"] = Json::parse(R"([{"exponents": [2, 0], "coeff": 1.0}])");
  CHECK(parse_error_kind(doc) == int(ErrorKind::Dimension));

  doc = base_config();
  doc["grid"]["N"] = 40;
  doc["analyses"] = {"choi"};
  CHECK(parse_error_kind(doc) == int(ErrorKind::Dimension));

  doc = base_config();
  doc["time"]["T"] = "long";
  CHECK(parse_error_kind(doc) == int(ErrorKind::InvalidArgument));
}

TEST_CASE("config error leaves no output behind") {
  const auto dir = scratch("bad");
  Json doc = base_config();
  doc["grid"]["points"] = 16;
  const auto out = run_in(dir, doc);
  CHECK(out.status == cli::kConfigError);
  CHECK(!fs::exists(dir / "out"));
  CHECK(!out.diagnostics.empty());

  std::ostringstream log;
  CHECK(cli::run_file(dir / "absent.json", log).status == cli::kConfigError);
}

TEST_CASE("run writes a complete manifest and is deterministic") {
  const auto dir = scratch("ok");
  Json doc = base_config();
  doc["analyses"] = {"check-field", "assemble", "evolve", "verify", "classical", "choi"};
  doc["grid"]["N"] = 16;
  doc["choi"] = {{"times", {0.05}}};
  const auto first = run_in(dir, doc);
  REQUIRE(first.status == cli::kOk);
  const auto manifest = io::read_json(first.manifest);
  CHECK(manifest["status"] == 0);
  CHECK(manifest["schema_version"] == cli::kSchemaVersion);
  std::set<std::string> listed;
  for (const auto& a : manifest["artifacts"]) {
    const std::string rel = a["path"];
    listed.insert(rel);
    const fs::path p = dir / "out" / rel;
    REQUIRE(fs::exists(p));
    CHECK(a["bytes"] == fs::file_size(p));
    CHECK(a["sha256"] == io::sha256_file(p));
  }
  for (const char* name : {"assumptions.json", "H.mtx", "G.mtx", "C.mtx", "Phi.mtx", "L1.mtx",
                           "residuals.csv", "evolve.json", "cf_report.json", "classical.json",
                           "choi.json"}) {
    CAPTURE(name);
    CHECK(listed.count(name) == 1);
  }

  std::ostringstream text;
  CHECK(cli::report(first.manifest, text) == 0);
  CHECK(text.str().find("conservativity defect ≤ 1e-8") != std::string::npos);
  CHECK(text.str().find("0 problem(s)") != std::string::npos);

  // Same config, second directory: identical bytes.
  const auto dir2 = scratch("ok2");
  const auto second = run_in(dir2, doc);
  REQUIRE(second.status == cli::kOk);
  const auto manifest2 = io::read_json(second.manifest);
  REQUIRE(manifest2["artifacts"].size() == manifest["artifacts"].size());
  for (std::size_t i = 0; i < manifest["artifacts"].size(); ++i) {
    CHECK(manifest2["artifacts"][i]["sha256"] == manifest["artifacts"][i]["sha256"]);
  }

  // Damage an artifact: the report flags it and still succeeds.
  fs::remove(dir / "out" / "choi.json");
  std::ofstream(dir / "out" / "evolve.json", std::ios::app) << " ";
  std::ostringstream damaged;
  CHECK(cli::report(first.manifest, damaged) == 0);
  CHECK(damaged.str().find("'choi.json' is missing") != std::string::npos);
  CHECK(damaged.str().find("'evolve.json' does not match its digest") != std::string::npos);
}

TEST_CASE("report edge cases") {
  const auto dir = scratch("report");
  std::ofstream(dir / "manifest.json") << "{}";
  std::ostringstream out;
  CHECK(cli::report(dir / "manifest.json", out) == 0);
  CHECK(out.str().find("no artifacts") != std::string::npos);

  std::ostringstream missing;
  CHECK(cli::report(dir / "nope.json", missing) == cli::kConfigError);
}

TEST_CASE("loose Picard settings surface as an invariant violation") {
  const auto dir = scratch("loose");
  Json doc = base_config();
  doc["time"]["tol"] = 10.0;
  doc["time"]["max_iter"] = 1;
  const auto out = run_in(dir, doc);
  CHECK(out.status == cli::kInvariantViolated);
  CHECK(fs::exists(dir / "out" / "manifest.json"));
  CHECK(io::read_json(dir / "out" / "manifest.json")["status"] == cli::kInvariantViolated);
}

TEST_CASE("non-convergence is a numerical failure") {
  const auto dir = scratch("nonconv");
  Json doc = base_config();
  doc["time"]["tol"] = 1e-14;
  doc["time"]["max_iter"] = 2;
  CHECK(run_in(dir, doc).status == cli::kNumericalFailure);
}
