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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace critnet::cli {

// Settings shared by every command. Thread count and output path are
// execution settings and are deliberately not part of the recorded config:
// they never change the numbers that are written.
struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string quad_backend = "truncated-panels";
  int quad_nodes = 64;
};

// Grid "lo:hi:n": n points from lo to hi inclusive.
struct Range {
  double lo = 0.0;
  double hi = 0.0;
  int n = 1;

  std::vector<double> points() const;
};

// Parses "lo:hi:n"; throws DomainError on malformed input.
Range parse_range(const std::string& text);
std::string format_range(const Range& r);

struct DepthTraceParams {
  std::string activation = "relu";
  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  int depth = 100;
  double lambda0 = 1.0;
  double q0 = 0.0;
  bool igb_coords = false;
};

struct PhaseDiagramParams {
  std::string activation = "tanh";
  Range sw_range{0.5, 4.0, 40};
  Range sb_range{0.0, 0.5, 20};
  double eoc_tolerance = 1e-3;
  int horizon = 500;
};

struct EocParams {
  std::string activation = "tanh";
  double q_min = 1e-4;
  double q_max = 20.0;
  int points = 200;
};

struct McParams {
  std::string activation = "relu";
  double sigma_w2 = 2.0;
  double sigma_b2 = 0.0;
  int width = 1000;
  int depth = 50;
  int input_dim = 0;  // 0: same as width (or the data file's column count)
  int samples = 100;
  int ensemble = 10;
  int classes = 2;
  int pairs = 200;
  std::vector<std::string> measure{"mf"};
  std::string data;  // optional CSV dataset
  bool standardize = true;
  std::optional<double> residual;  // scale exponent of the residual branch
};

struct G0Params {
  double gamma = 1.0;
  std::int64_t draws = 100000;
  int bins = 20;
};

struct SelfCheckParams {
  std::vector<std::string> files;
};

// The complete description of one run. Exactly one command block is active:
// the one named by `command`.
struct RunConfig {
  std::string command;
  GlobalOptions global;
  DepthTraceParams depth_trace;
  PhaseDiagramParams phase_diagram;
  EocParams eoc;
  McParams mc;
  G0Params g0;
  SelfCheckParams self_check;
};

const std::vector<std::string>& command_names();

nlohmann::json to_json(const RunConfig& cfg);
// Strict parse: unknown keys, missing command, or wrongly typed values throw
// DomainError.
RunConfig run_config_from_json(const nlohmann::json& j);

// Loads a RunConfig from a JSON file, or from the "# config:" line embedded in
// a CSV written by this tool, or from the "config" member of a JSON report.
RunConfig load_run_config(const std::string& path);

}  // namespace critnet::cli
