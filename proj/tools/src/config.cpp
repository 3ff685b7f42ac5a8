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

#include "critnet_cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "critnet/errors.hpp"

namespace critnet::cli {

using nlohmann::json;

// ---- ranges -------------------------------------------------------------------

std::vector<double> Range::points() const {
  std::vector<double> p(static_cast<std::size_t>(n));
  if (n == 1) {
    p[0] = lo;
    return p;
  }
  for (int i = 0; i < n; ++i) p[i] = (lo * (n - 1 - i) + hi * i) / (n - 1);
  return p;
}

namespace {

double parse_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
    throw DomainError("malformed " + what + " '" + s + "'");
  return v;
}

}  // namespace

Range parse_range(const std::string& text) {
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? std::string::npos : text.find(':', a + 1);
  if (a == std::string::npos || b == std::string::npos || text.find(':', b + 1) != std::string::npos)
    throw DomainError("malformed range '" + text + "' (expected lo:hi:n)");
  Range r;
  r.lo = parse_double(text.substr(0, a), "range bound");
  r.hi = parse_double(text.substr(a + 1, b - a - 1), "range bound");
  const std::string ns = text.substr(b + 1);
  int n = 0;
  const auto res = std::from_chars(ns.data(), ns.data() + ns.size(), n);
  if (ns.empty() || res.ec != std::errc() || res.ptr != ns.data() + ns.size() || n < 1)
    throw DomainError("malformed range '" + text + "': n must be a positive integer");
  if (r.hi < r.lo) throw DomainError("malformed range '" + text + "': hi < lo");
  if (n == 1 && r.hi != r.lo) throw DomainError("malformed range '" + text + "': n = 1 needs lo = hi");
  r.n = n;
  return r;
}

std::string format_range(const Range& r) {
  std::ostringstream os;
  os.precision(17);
  os << r.lo << ':' << r.hi << ':' << r.n;
  return os.str();
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"depth-trace", "phase-diagram", "eoc",
                                              "mc",          "g0",            "self-check"};
  return names;
}

// ---- strict JSON reading ------------------------------------------------------

namespace {

// Reads members of one JSON object and rejects any member that was not read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw DomainError(where_ + ": expected a JSON object");
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void read(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void read(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<int>();
    }
  }
  void read(const std::string& key, std::int64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) fail(key, "an integer");
      out = v->get<std::int64_t>();
    }
  }
  void read(const std::string& key, std::uint64_t& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void read(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) fail(key, "a boolean");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::string& out) {
    if (const json* v = find(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  void read(const std::string& key, std::vector<std::string>& out) {
    if (const json* v = find(key)) {
      if (!v->is_array()) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "an array of strings");
        out.push_back(e.get<std::string>());
      }
    }
  }
  void read(const std::string& key, std::optional<double>& out) {
    if (const json* v = find(key)) {
      if (v->is_null()) {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        fail(key, "a number or null");
      }
    }
  }
  void read(const std::string& key, Range& out) {
    if (const json* v = find(key)) {
      ObjectReader r(*v, where_ + "." + key);
      r.read("lo", out.lo);
      r.read("hi", out.hi);
      r.read("n", out.n);
      r.finish();
      if (out.n < 1 || !(out.hi >= out.lo)) throw DomainError(where_ + "." + key + ": invalid range");
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw DomainError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& type) const {
    throw DomainError(where_ + "." + key + " must be " + type);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json range_json(const Range& r) { return json{{"lo", r.lo}, {"hi", r.hi}, {"n", r.n}}; }

json params_json(const RunConfig& c) {
  const std::string& cmd = c.command;
  if (cmd == "depth-trace") {
    const auto& p = c.depth_trace;
    return json{{"activation", p.activation}, {"sigma_w2", p.sigma_w2}, {"sigma_b2", p.sigma_b2},
                {"depth", p.depth},           {"lambda0", p.lambda0},   {"q0", p.q0},
                {"igb_coords", p.igb_coords}};
  }
  if (cmd == "phase-diagram") {
    const auto& p = c.phase_diagram;
    return json{{"activation", p.activation},       {"sw_range", range_json(p.sw_range)},
                {"sb_range", range_json(p.sb_range)}, {"eoc_tolerance", p.eoc_tolerance},
                {"horizon", p.horizon}};
  }
  if (cmd == "eoc") {
    const auto& p = c.eoc;
    return json{{"activation", p.activation}, {"q_min", p.q_min}, {"q_max", p.q_max}, {"points", p.points}};
  }
  if (cmd == "mc") {
    const auto& p = c.mc;
    json j{{"activation", p.activation}, {"sigma_w2", p.sigma_w2}, {"sigma_b2", p.sigma_b2},
           {"width", p.width},           {"depth", p.depth},       {"input_dim", p.input_dim},
           {"samples", p.samples},       {"ensemble", p.ensemble}, {"classes", p.classes},
           {"pairs", p.pairs},           {"measure", p.measure},   {"data", p.data},
           {"standardize", p.standardize}};
    j["residual"] = p.residual ? json(*p.residual) : json(nullptr);
    return j;
  }
  if (cmd == "g0") {
    const auto& p = c.g0;
    return json{{"gamma", p.gamma}, {"draws", p.draws}, {"bins", p.bins}};
  }
  if (cmd == "self-check") return json{{"files", c.self_check.files}};
  throw DomainError("unknown command '" + cmd + "'");
}

void read_params(RunConfig& c, const json& j) {
  ObjectReader r(j, "params");
  const std::string& cmd = c.command;
  if (cmd == "depth-trace") {
    auto& p = c.depth_trace;
    r.read("activation", p.activation);
    r.read("sigma_w2", p.sigma_w2);
    r.read("sigma_b2", p.sigma_b2);
    r.read("depth", p.depth);
    r.read("lambda0", p.lambda0);
    r.read("q0", p.q0);
    r.read("igb_coords", p.igb_coords);
  } else if (cmd == "phase-diagram") {
    auto& p = c.phase_diagram;
    r.read("activation", p.activation);
    r.read("sw_range", p.sw_range);
    r.read("sb_range", p.sb_range);
    r.read("eoc_tolerance", p.eoc_tolerance);
    r.read("horizon", p.horizon);
  } else if (cmd == "eoc") {
    auto& p = c.eoc;
    r.read("activation", p.activation);
    r.read("q_min", p.q_min);
    r.read("q_max", p.q_max);
    r.read("points", p.points);
  } else if (cmd == "mc") {
    auto& p = c.mc;
    r.read("activation", p.activation);
    r.read("sigma_w2", p.sigma_w2);
    r.read("sigma_b2", p.sigma_b2);
    r.read("width", p.width);
    r.read("depth", p.depth);
    r.read("input_dim", p.input_dim);
    r.read("samples", p.samples);
    r.read("ensemble", p.ensemble);
    r.read("classes", p.classes);
    r.read("pairs", p.pairs);
    r.read("measure", p.measure);
    r.read("data", p.data);
    r.read("standardize", p.standardize);
    r.read("residual", p.residual);
  } else if (cmd == "g0") {
    auto& p = c.g0;
    r.read("gamma", p.gamma);
    r.read("draws", p.draws);
    r.read("bins", p.bins);
  } else if (cmd == "self-check") {
    r.read("files", c.self_check.files);
  }
  r.finish();
}

}  // namespace

json to_json(const RunConfig& cfg) {
  return json{{"command", cfg.command},
              {"seed", cfg.global.seed},
              {"quad_backend", cfg.global.quad_backend},
              {"quad_nodes", cfg.global.quad_nodes},
              {"params", params_json(cfg)}};
}

RunConfig run_config_from_json(const json& j) {
  ObjectReader r(j, "config");
  RunConfig cfg;
  r.read("command", cfg.command);
  if (cfg.command.empty()) throw DomainError("config: missing 'command'");
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), cfg.command) == names.end())
    throw DomainError("config: unknown command '" + cfg.command + "'");
  r.read("seed", cfg.global.seed);
  r.read("quad_backend", cfg.global.quad_backend);
  r.read("quad_nodes", cfg.global.quad_nodes);
  if (const json* p = r.find("params")) read_params(cfg, *p);
  r.finish();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  // A CSV written by this tool carries its config on a "# config: " line.
  const std::string marker = "# config: ";
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind(marker, 0) == 0) {
      try {
        return run_config_from_json(json::parse(line.substr(marker.size())));
      } catch (const json::exception& e) {
        throw DomainError("malformed embedded config in '" + path + "': " + e.what());
      }
    }
    if (line.empty() || line[0] != '#') break;
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError("malformed config '" + path + "': " + e.what());
  }
  // JSON reports written by `mc` nest the config.
  if (j.is_object() && j.contains("config") && j.contains("schema")) return run_config_from_json(j["config"]);
  return run_config_from_json(j);
}

}  // namespace critnet::cli
