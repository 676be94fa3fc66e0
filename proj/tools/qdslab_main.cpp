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


// qdslab: batch front-end.
//
//   qdslab run <config.json>      run the analyses, write artifacts + manifest
//   qdslab report <manifest.json> plain-text summary of a finished run

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qdslab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qdslab - minimal quantum dynamical semigroup laboratory"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Execute the analyses described by a config file");
  run->add_option("config", config, "JSON config (schema_version 1)")->required();
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "Suppress progress output");

  std::string manifest;
  auto* report = app.add_subcommand("report", "Summarize a run manifest");
  report->add_option("manifest", manifest, "manifest.json written by 'run'")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qdslab::cli::kConfigError;
  }

  if (*run) {
    std::ostream null_stream(nullptr);
    const auto outcome = qdslab::cli::run_file(config, quiet ? null_stream : std::cerr);
    if (quiet) {
      for (const auto& d : outcome.diagnostics) std::cerr << d << "\n";
    }
    return outcome.status;
  }
  return qdslab::cli::report(manifest, std::cout);
}
