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

#include "critnet_cli/output.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "critnet/errors.hpp"

#ifndef CRITNET_VERSION_STRING
#define CRITNET_VERSION_STRING "0.0.0"
#endif

namespace critnet::cli {

const std::string& tool_version() {
  static const std::string v = CRITNET_VERSION_STRING;
  return v;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string Schema::header() const {
  std::string h;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) h += ',';
    h += columns[i].name;
  }
  return h;
}

namespace {

constexpr auto I = ColumnType::Int;
constexpr auto R = ColumnType::Real;
constexpr auto T = ColumnType::Text;
constexpr auto B = ColumnType::Bool;

std::vector<Column> band_columns(const std::string& q) {
  return {{q + "_lo", R}, {q + "_mid", R}, {q + "_hi", R}};
}

std::vector<Schema> build_schemas() {
  std::vector<Schema> s;
  s.push_back({"depth-trace", 1,
               {{"layer", I}, {"lambda", R}, {"q", R}, {"c", R}, {"gamma", R}, {"chi_tilde", R},
                {"chi1", R}, {"sd2", R}, {"sc2", R}}});
  s.push_back({"phase-diagram", 1,
               {{"sigma_b2", R}, {"sigma_w2", R}, {"phase", T}, {"c_star", R}, {"chi_limit", R},
                {"variance_fate", T}, {"ambiguous", B}}});
  s.push_back({"eoc", 1,
               {{"sigma_b2", R}, {"sigma_w2", R}, {"q_star", R}, {"res_var", R}, {"res_chi", R},
                {"note", T}}});
  s.push_back({"g0", 1, {{"bin_lo", R}, {"bin_hi", R}, {"count", I}, {"density", R}}});
  Schema layers{"mc-layers", 1, {{"layer", I}, {"realizations", I}}};
  for (const char* q : {"lambda", "q", "c", "sd2", "sc2", "gamma"})
    for (auto& c : band_columns(q)) layers.columns.push_back(c);
  for (const char* q : {"theory_lambda", "theory_q", "theory_c", "theory_sd2", "theory_sc2", "theory_gamma"})
    layers.columns.push_back({q, R});
  layers.columns.push_back({"lambda_inside_band", B});
  layers.columns.push_back({"c_inside_band", B});
  s.push_back(layers);
  s.push_back({"mc-grads", 1,
               {{"layer", I}, {"all", R}, {"favored", R}, {"unfavored", R}, {"cross", R},
                {"normalized", R}, {"theory_profile", R}}});
  s.push_back({"mc-g0", 1,
               {{"realization", I}, {"g0", R}, {"max_class_freq", R}, {"theory_gamma", R}}});
  return s;
}

std::string quote_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string render(const Cell& cell, ColumnType type, const std::string& column) {
  switch (type) {
    case ColumnType::Int:
      if (const auto* v = std::get_if<std::int64_t>(&cell)) return std::to_string(*v);
      break;
    case ColumnType::Real:
      if (const auto* v = std::get_if<double>(&cell)) return format_real(*v);
      break;
    case ColumnType::Text:
      if (const auto* v = std::get_if<std::string>(&cell)) return quote_text(*v);
      break;
    case ColumnType::Bool:
      if (const auto* v = std::get_if<bool>(&cell)) return *v ? "1" : "0";
      break;
  }
  throw InvariantViolation("cell of column '" + column + "' has the wrong type");
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

bool parses_as(const std::string& s, ColumnType type) {
  switch (type) {
    case ColumnType::Int: {
      long long v = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    case ColumnType::Real: {
      if (s == "inf" || s == "-inf" || s == "nan") return true;
      double v = 0;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      return !s.empty() && r.ec == std::errc() && r.ptr == s.data() + s.size();
    }
    case ColumnType::Text:
      return true;
    case ColumnType::Bool:
      return s == "0" || s == "1";
  }
  return false;
}

}  // namespace

const std::vector<Schema>& schemas() {
  static const std::vector<Schema> s = build_schemas();
  return s;
}

const Schema& schema(const std::string& name) {
  for (const auto& s : schemas())
    if (s.name == name) return s;
  throw InvariantViolation("unknown schema '" + name + "'");
}

RunMetadata make_metadata(const RunConfig& cfg) {
  return {tool_version(), to_json(cfg), cfg.global.seed, utc_now()};
}

void write_csv(const std::string& path, const Schema& schema, const RunMetadata& prov,
               const std::vector<Row>& rows) {
  std::ostringstream os;
  os << "# critnet-version: " << prov.version << '\n'
     << "# schema: " << schema.id() << '\n'
     << "# seed: " << prov.seed << '\n'
     << "# timestamp: " << prov.timestamp << '\n'
     << "# config: " << prov.config.dump() << '\n'
     << schema.header() << '\n';
  for (const Row& row : rows) {
    if (row.size() != schema.columns.size())
      throw InvariantViolation("row width does not match schema " + schema.id());
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << render(row[i], schema.columns[i].type, schema.columns[i].name);
    }
    os << '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write output file '" + path + "'");
  out << os.str();
  if (!out) throw DomainError("error while writing '" + path + "'");
}

void write_json_report(const std::string& path, const std::string& schema_id,
                       const RunMetadata& prov, nlohmann::json body) {
  body["schema"] = schema_id;
  body["critnet_version"] = prov.version;
  body["seed"] = prov.seed;
  body["timestamp"] = prov.timestamp;
  body["config"] = prov.config;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write output file '" + path + "'");
  out << body.dump(2) << '\n';
  if (!out) throw DomainError("error while writing '" + path + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

Validation validate_csv(const std::string& path) {
  Validation v;
  std::ifstream in(path);
  if (!in) {
    v.problems.push_back("cannot open '" + path + "'");
    return v;
  }
  std::string line;
  std::vector<std::pair<std::string, std::string>> meta;
  std::string header;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) {
        v.problems.push_back("malformed comment line: " + line);
        continue;
      }
      meta.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    header = line;
    break;
  }
  auto get = [&](const std::string& key) -> const std::string* {
    for (const auto& [k, val] : meta)
      if (k == key) return &val;
    return nullptr;
  };
  for (const char* key : {"critnet-version", "schema", "seed", "timestamp", "config"})
    if (!get(key)) v.problems.push_back(std::string("missing '# ") + key + ":' line");
  if (const std::string* c = get("config")) {
    try {
      run_config_from_json(nlohmann::json::parse(*c));
    } catch (const std::exception& e) {
      v.problems.push_back(std::string("embedded config does not parse: ") + e.what());
    }
  }
  const Schema* sc = nullptr;
  if (const std::string* id = get("schema")) {
    v.schema_id = *id;
    for (const auto& s : schemas())
      if (s.id() == *id) sc = &s;
    if (!sc) v.problems.push_back("unknown schema '" + *id + "'");
  }
  if (!sc) return v;
  if (header != sc->header()) {
    v.problems.push_back("column header does not match " + sc->id());
    return v;
  }
  std::size_t line_no = meta.size() + 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cells = split_csv_line(line);
    if (cells.size() != sc->columns.size()) {
      v.problems.push_back("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(sc->columns.size()) + " cells, found " +
                           std::to_string(cells.size()));
      continue;
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (!parses_as(cells[i], sc->columns[i].type))
        v.problems.push_back("line " + std::to_string(line_no) + ": column '" +
                             sc->columns[i].name + "' has invalid value '" + cells[i] + "'");
    }
    ++v.rows;
  }
  return v;
}

}  // namespace critnet::cli
