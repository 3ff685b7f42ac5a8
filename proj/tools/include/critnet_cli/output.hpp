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
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "critnet_cli/config.hpp"

namespace critnet::cli {

// Version of the tool, as recorded in every output file.
const std::string& tool_version();

// Decimal rendering with 17 significant digits (round-trips every double);
// non-finite values render as inf, -inf and nan.
std::string format_real(double v);

enum class ColumnType { Int, Real, Text, Bool };

struct Column {
  std::string name;
  ColumnType type;
};

// A versioned CSV layout. Files name it on their "# schema:" line as
// name/version.
struct Schema {
  std::string name;
  int version = 1;
  std::vector<Column> columns;

  std::string id() const { return name + "/" + std::to_string(version); }
  std::string header() const;
};

const std::vector<Schema>& schemas();
const Schema& schema(const std::string& name);

// Metadata written at the top of every output.
struct RunMetadata {
  std::string version;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO 8601, UTC
};

RunMetadata make_metadata(const RunConfig& cfg);

using Cell = std::variant<std::int64_t, double, std::string, bool>;
using Row = std::vector<Cell>;

// Writes a CSV: comment lines with the run metadata, the column header, then
// the rows. Throws DomainError if the file cannot be written or a row does
// not match the schema.
void write_csv(const std::string& path, const Schema& schema, const RunMetadata& prov,
               const std::vector<Row>& rows);

// Adds version, schema, seed, timestamp and config members to a JSON report
// and writes it with two-space indentation.
void write_json_report(const std::string& path, const std::string& schema_id,
                       const RunMetadata& prov, nlohmann::json body);

struct Validation {
  std::string schema_id;  // as declared by the file
  std::size_t rows = 0;
  std::vector<std::string> problems;  // empty when the file is valid
  bool ok() const { return problems.empty(); }
};

// Checks a CSV written by this tool against the schema it declares:
// run metadata lines present, config parses, header matches, every row has the
// right number of cells and each cell parses as its column type.
Validation validate_csv(const std::string& path);

// Splits one CSV line, honouring double-quoted cells.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace critnet::cli
