// Copyright 2026 The critnet Authors
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

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "critnet/quadrature.hpp"
#include "critnet_cli/config.hpp"
#include "critnet_cli/output.hpp"

namespace critnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

QuadratureSpec quadrature_of(const GlobalOptions& g);

// Computations behind each command; they only read the config and never
// touch the file system (except `mc`, which may read its --data file).
std::vector<Row> compute_depth_trace(const RunConfig& cfg);
std::vector<Row> compute_phase_diagram(const RunConfig& cfg, int threads);

struct EocOutput {
  std::vector<Row> rows;
  std::string diagnostic;  // set when the curve is empty
};
EocOutput compute_eoc(const RunConfig& cfg);

std::vector<Row> compute_g0(const RunConfig& cfg);

struct McOutput {
  nlohmann::json report;  // measurement, theory and comparison summary
  std::vector<Row> layers;
  std::vector<Row> grads;
  std::vector<Row> g0;
};
McOutput compute_mc(const RunConfig& cfg, int threads);

// Paths of the CSV companions of an `mc` JSON report.
struct McPaths {
  std::string report, layers, grads, g0;
};
McPaths mc_paths(const std::string& out);

// Runs a command and writes its outputs under `out`. Diagnostics go to `err`,
// progress lines to `log`. Returns the process exit code; library errors are
// propagated as exceptions.
int execute(const RunConfig& cfg, const std::string& out, int threads, std::ostream& log,
            std::ostream& err);

// Full command-line entry point: parses arguments, runs, and maps errors to
// exit codes (2 usage or configuration, 3 numeric failure).
int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace critnet::cli
