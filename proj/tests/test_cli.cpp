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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "critnet/errors.hpp"
#include "critnet/stats.hpp"
#include "critnet_cli/commands.hpp"

namespace critnet::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "critnet");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string strip_timestamp(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# timestamp:", 0) != 0 && line.find("\"timestamp\"") == std::string::npos) out += line + "\n";
  return out;
}

// Data rows of a CSV written by the tool, split into cells.
std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (!header) {
      header = true;
      continue;
    }
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir_;
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("critnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string file(const std::string& name) const { return (dir_ / name).string(); }
};

TEST(Config, RangeParsing) {
  const auto r = parse_range("0.5:4:36");
  EXPECT_EQ(r.n, 36);
  const auto pts = r.points();
  EXPECT_EQ(pts.front(), 0.5);
  EXPECT_EQ(pts.back(), 4.0);
  EXPECT_EQ(pts[15], 2.0);
  EXPECT_EQ(parse_range(format_range(r)).points(), pts);
  for (const char* bad : {"1:2", "a:b:3", "1:2:0", "1:2:3:4", "1:2:1", ""})
    EXPECT_THROW(parse_range(bad), DomainError) << bad;
  EXPECT_EQ(parse_range("0.3:0.3:1").points(), std::vector<double>{0.3});
}

TEST(Config, JsonRoundTripIsIdentity) {
  RunConfig c;
  c.command = "mc";
  c.global.seed = 123456789012345ULL;
  c.global.quad_backend = "hermite";
  c.mc.measure = {"mf", "grads"};
  c.mc.residual = 0.5;
  c.mc.sigma_w2 = 0.1 + 0.2;  // not exactly representable as a short decimal
  const auto j = to_json(c);
  const auto back = run_config_from_json(j);
  EXPECT_EQ(to_json(back), j);
  EXPECT_EQ(back.mc.sigma_w2, c.mc.sigma_w2);
  EXPECT_EQ(back.global.seed, c.global.seed);
  ASSERT_TRUE(back.mc.residual);
  EXPECT_EQ(*back.mc.residual, 0.5);
  // Through text as well.
  EXPECT_EQ(to_json(run_config_from_json(nlohmann::json::parse(j.dump()))), j);
}

TEST(Config, UnknownKeysAreRejected) {
  RunConfig c;
  c.command = "depth-trace";
  auto j = to_json(c);
  j["extra"] = true;
  EXPECT_THROW(run_config_from_json(j), DomainError);
  j = to_json(c);
  j["params"]["sigma_w"] = 2.0;
  EXPECT_THROW(run_config_from_json(j), DomainError);
  j = to_json(c);
  j["params"]["depth"] = "deep";
  EXPECT_THROW(run_config_from_json(j), DomainError);
  j = to_json(c);
  j["command"] = "train";
  EXPECT_THROW(run_config_from_json(j), DomainError);
}

TEST(Output, SeventeenSignificantDigits) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(format_real(1.0), "1");
  EXPECT_EQ(format_real(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_real(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_real(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(std::stod(format_real(1.0 / 3.0)), 1.0 / 3.0);
}

TEST_F(Cli, DepthTraceCriticalRelu) {
  const auto r = run({"depth-trace", "--activation", "relu", "--sigma-w2", "2.0", "--sigma-b2", "0.0",
                      "--depth", "100", "--out", file("t.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = rows_of(file("t.csv"));
  ASSERT_EQ(rows.size(), 101u);
  EXPECT_EQ(rows[100][0], "100");
  EXPECT_NEAR(std::stod(rows[100][1]), 1.0, 1e-9);
  EXPECT_TRUE(validate_csv(file("t.csv")).ok());
}

TEST_F(Cli, DepthTraceLinearKeepsZeroCorrelation) {
  ASSERT_EQ(run({"depth-trace", "--activation", "linear", "--sigma-w2", "1", "--depth", "10", "--out", file("l.csv")}).code, 0);
  const auto rows = rows_of(file("l.csv"));
  ASSERT_EQ(rows.size(), 11u);
  for (const auto& row : rows) EXPECT_EQ(row[3], "0");
}

TEST_F(Cli, DepthTraceChaoticTanhAndIgbCoordinates) {
  ASSERT_EQ(run({"depth-trace", "--activation", "tanh", "--sigma-w2", "3", "--sigma-b2", "0.1", "--depth",
                 "100", "--out", file("a.csv")}).code, 0);
  ASSERT_EQ(run({"depth-trace", "--activation", "tanh", "--sigma-w2", "3", "--sigma-b2", "0.1", "--depth",
                 "100", "--igb-coords", "--out", file("b.csv")}).code, 0);
  const auto a = rows_of(file("a.csv"));
  const auto b = rows_of(file("b.csv"));
  ASSERT_EQ(a.size(), 101u);
  ASSERT_EQ(b.size(), 101u);
  EXPECT_LT(std::stod(a[100][3]), 1.0);
  for (std::size_t l = 0; l < a.size(); l += 10) EXPECT_NEAR(std::stod(a[l][3]), std::stod(b[l][3]), 1e-7);
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({"depth-trace", "--activation", "softplus", "--out", file("x.csv")}).code, kExitUsage);
  EXPECT_EQ(run({"phase-diagram", "--sw-range", "1:2", "--out", file("x.csv")}).code, kExitUsage);
  EXPECT_EQ(run({"g0", "--gamma", "-1", "--out", file("x.csv")}).code, kExitUsage);
  EXPECT_EQ(run({"g0", "--gamma", "abc", "--out", file("x.csv")}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"g0"}).code, kExitUsage);  // no --out
  EXPECT_EQ(run({"g0", "--quad-backend", "simpson", "--out", file("x.csv")}).code, kExitUsage);
  const auto r = run({"depth-trace", "--activation", "softplus", "--out", file("x.csv")});
  EXPECT_NE(r.err.find("softplus"), std::string::npos);
}

TEST_F(Cli, GlobalFlagsMayFollowTheSubcommand) {
  ASSERT_EQ(run({"--seed", "7", "g0", "--draws", "100", "--out", file("a.csv")}).code, 0);
  ASSERT_EQ(run({"g0", "--draws", "100", "--seed", "7", "--out", file("b.csv")}).code, 0);
  EXPECT_EQ(strip_timestamp(slurp(file("a.csv"))), strip_timestamp(slurp(file("b.csv"))));
  EXPECT_NE(slurp(file("a.csv")).find("# seed: 7"), std::string::npos);
}

TEST_F(Cli, G0HistogramShapes) {
  ASSERT_EQ(run({"g0", "--gamma", "1", "--draws", "100000", "--bins", "20", "--out", file("u.csv")}).code, 0);
  std::vector<double> counts;
  double density_sum = 0.0;
  for (const auto& row : rows_of(file("u.csv"))) {
    counts.push_back(std::stod(row[2]));
    density_sum += std::stod(row[3]);
  }
  ASSERT_EQ(counts.size(), 20u);
  EXPECT_NEAR(density_sum / 20, 1.0, 1e-12);
  EXPECT_GT(chi2_uniform_pvalue(counts), 0.01);

  ASSERT_EQ(run({"g0", "--gamma", "0.01", "--draws", "100000", "--bins", "20", "--out", file("n.csv")}).code, 0);
  const auto narrow = rows_of(file("n.csv"));
  std::size_t peak = 0;
  for (std::size_t i = 0; i < narrow.size(); ++i)
    if (std::stod(narrow[i][2]) > std::stod(narrow[peak][2])) peak = i;
  EXPECT_TRUE(std::stod(narrow[peak][0]) <= 0.5 && std::stod(narrow[peak][1]) >= 0.5);

  ASSERT_EQ(run({"g0", "--gamma", "100", "--draws", "100000", "--bins", "20", "--out", file("b.csv")}).code, 0);
  const auto wide = rows_of(file("b.csv"));
  const double edge = std::stod(wide.front()[2]) + std::stod(wide.back()[2]);
  for (std::size_t i = 1; i + 1 < wide.size(); ++i) EXPECT_LT(std::stod(wide[i][2]), edge / 2);
}

TEST_F(Cli, EocReluSingletonAndTanhCurve) {
  ASSERT_EQ(run({"eoc", "--activation", "relu+maxpool", "--out", file("r.csv")}).code, 0);
  const auto r = rows_of(file("r.csv"));
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0][0], "0");
  EXPECT_FALSE(r[0][5].empty());
  ASSERT_EQ(run({"eoc", "--activation", "tanh", "--points", "10", "--q-max", "5", "--out", file("t.csv")}).code, 0);
  EXPECT_GE(rows_of(file("t.csv")).size(), 5u);
}

TEST_F(Cli, PhaseDiagramRowOrderAndLabels) {
  ASSERT_EQ(run({"phase-diagram", "--activation", "relu", "--sw-range", "1.5:2.5:3", "--sb-range", "0:0.1:2",
                 "--out", file("p.csv")}).code, 0);
  const auto rows = rows_of(file("p.csv"));
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0][0], "0");
  EXPECT_EQ(rows[1][1], "2");
  EXPECT_EQ(rows[1][2], "TransientDeepPrejudice");
  EXPECT_EQ(rows[3][0], "0.10000000000000001");
  for (const auto& row : rows) EXPECT_NE(row[2], "ChaoticNeutrality");
}

TEST_F(Cli, ReplayReproducesEveryFile) {
  ASSERT_EQ(run({"--seed", "3", "mc", "--width", "24", "--depth", "3", "--samples", "10", "--ensemble", "4",
                 "--measure", "mf,igb,g0,grads", "--out", file("m.json")}).code, 0);
  const auto a = mc_paths(file("m.json"));
  for (const auto& f : {a.layers, a.grads, a.g0}) EXPECT_TRUE(validate_csv(f).ok()) << f;
  ASSERT_EQ(run({"--config", a.layers, "--threads", "3", "--out", file("n.json")}).code, 0);
  const auto b = mc_paths(file("n.json"));
  EXPECT_EQ(strip_timestamp(slurp(a.report)), strip_timestamp(slurp(b.report)));
  EXPECT_EQ(strip_timestamp(slurp(a.layers)), strip_timestamp(slurp(b.layers)));
  EXPECT_EQ(strip_timestamp(slurp(a.grads)), strip_timestamp(slurp(b.grads)));
  EXPECT_EQ(strip_timestamp(slurp(a.g0)), strip_timestamp(slurp(b.g0)));

  ASSERT_EQ(run({"phase-diagram", "--sw-range", "1:3:3", "--sb-range", "0:0.2:2", "--out", file("p.csv")}).code, 0);
  ASSERT_EQ(run({"--config", file("p.csv"), "--out", file("q.csv")}).code, 0);
  EXPECT_EQ(strip_timestamp(slurp(file("p.csv"))), strip_timestamp(slurp(file("q.csv"))));
}

TEST_F(Cli, ReportCarriesRunMetadata) {
  ASSERT_EQ(run({"mc", "--width", "16", "--depth", "2", "--samples", "6", "--ensemble", "2", "--out", file("m.json")}).code, 0);
  const auto j = nlohmann::json::parse(slurp(file("m.json")));
  for (const char* key : {"critnet_version", "config", "seed", "timestamp", "schema", "measurement", "theory",
                          "inside_band", "summary"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["inside_band"].size(), 3u);
}

TEST_F(Cli, DatasetDimensionMismatchExitsTwo) {
  std::ofstream(file("d.csv")) << "x,y,z\n1,2,3\n4,5,7\n0,1,1\n";
  EXPECT_EQ(run({"mc", "--data", file("d.csv"), "--input-dim", "5", "--width", "8", "--depth", "2", "--samples",
                 "3", "--ensemble", "2", "--out", file("m.json")}).code, kExitUsage);
  EXPECT_EQ(run({"mc", "--data", file("d.csv"), "--width", "8", "--depth", "2", "--samples", "3", "--ensemble",
                 "2", "--out", file("m.json")}).code, 0);
  EXPECT_EQ(run({"mc", "--measure", "weights", "--width", "8", "--depth", "2", "--out", file("m.json")}).code,
            kExitUsage);
}

TEST_F(Cli, SelfCheckValidatesFiles) {
  EXPECT_EQ(run({"self-check"}).code, 0);
  ASSERT_EQ(run({"g0", "--draws", "50", "--out", file("g.csv")}).code, 0);
  EXPECT_EQ(run({"self-check", file("g.csv")}).code, 0);
  // Corrupt a cell type and drop the config line.
  std::string text = slurp(file("g.csv"));
  const auto pos = text.rfind('\n', text.size() - 2);
  text = text.substr(0, pos + 1) + "0.95,1,many,1\n";
  std::ofstream(file("bad.csv")) << text;
  const auto r = run({"self-check", file("bad.csv")});
  EXPECT_EQ(r.code, kExitNumeric);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_FALSE(validate_csv(file("bad.csv")).ok());
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
  ASSERT_EQ(run({"phase-diagram", "--activation", "tanh", "--sw-range", "1:3:4", "--sb-range", "0:0.3:3", "--threads",
                 "1", "--out", file("a.csv")}).code, 0);
  ::setenv("CRITNET_THREADS", "4", 1);
  ASSERT_EQ(run({"phase-diagram", "--activation", "tanh", "--sw-range", "1:3:4", "--sb-range", "0:0.3:3",
                 "--out", file("b.csv")}).code, 0);
  ::unsetenv("CRITNET_THREADS");
  EXPECT_EQ(strip_timestamp(slurp(file("a.csv"))), strip_timestamp(slurp(file("b.csv"))));
}

}  // namespace
}  // namespace critnet::cli
