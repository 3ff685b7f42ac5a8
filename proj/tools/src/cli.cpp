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

#include <exception>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "critnet/errors.hpp"
#include "critnet/parallel.hpp"
#include "critnet_cli/commands.hpp"

namespace critnet::cli {

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& log, std::ostream& err) {
  CLI::App app{"critnet: signal propagation and phase diagrams of random deep networks"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(0, 1);

  RunConfig cfg;
  std::string out;
  int threads = 0;
  std::string config_file;
  app.add_option("--seed", cfg.global.seed, "Master seed of every random stream");
  app.add_option("--quad-backend", cfg.global.quad_backend,
                 "Gaussian expectation backend: truncated-panels or hermite");
  app.add_option("--quad-nodes", cfg.global.quad_nodes, "Nodes per quadrature panel / rule");
  app.add_option("--threads", threads, "Worker threads (default: CRITNET_THREADS, else all cores)");
  app.add_option("--out", out, "Output file (mc: JSON report; CSV companions alongside)");
  app.add_option("--config", config_file,
                 "Replay a run from a JSON config or from the config embedded in an output file");

  auto* dt = app.add_subcommand("depth-trace", "Mean-field layer-by-layer trace");
  dt->fallthrough();
  auto& d = cfg.depth_trace;
  dt->add_option("--activation", d.activation, "Activation name")->capture_default_str();
  dt->add_option("--sigma-w2", d.sigma_w2, "Weight variance")->capture_default_str();
  dt->add_option("--sigma-b2", d.sigma_b2, "Bias variance")->capture_default_str();
  dt->add_option("--depth", d.depth, "Number of layers")->capture_default_str();
  dt->add_option("--lambda0", d.lambda0, "Initial signal variance")->capture_default_str();
  dt->add_option("--q0", d.q0, "Initial signal covariance")->capture_default_str();
  dt->add_flag("--igb-coords", d.igb_coords, "Iterate in data/centres coordinates");

  auto* pd = app.add_subcommand("phase-diagram", "Phase label on a (sigma_w2, sigma_b2) grid");
  pd->fallthrough();
  auto& p = cfg.phase_diagram;
  std::string sw_range = format_range(p.sw_range);
  std::string sb_range = format_range(p.sb_range);
  pd->add_option("--activation", p.activation, "Activation name")->capture_default_str();
  pd->add_option("--sw-range", sw_range, "sigma_w2 grid lo:hi:n")->capture_default_str();
  pd->add_option("--sb-range", sb_range, "sigma_b2 grid lo:hi:n")->capture_default_str();
  pd->add_option("--eoc-tol", p.eoc_tolerance, "|chi - 1| band of the edge of chaos")
      ->capture_default_str();
  pd->add_option("--horizon", p.horizon, "Depth of the correlation trace")->capture_default_str();

  auto* eo = app.add_subcommand("eoc", "Edge-of-chaos curve");
  eo->fallthrough();
  auto& e = cfg.eoc;
  eo->add_option("--activation", e.activation, "Activation name")->capture_default_str();
  eo->add_option("--q-min", e.q_min, "Smallest fixed-point variance")->capture_default_str();
  eo->add_option("--q-max", e.q_max, "Largest fixed-point variance")->capture_default_str();
  eo->add_option("--points", e.points, "Grid points in q")->capture_default_str();

  auto* mc = app.add_subcommand("mc", "Monte Carlo ensemble of finite networks");
  mc->fallthrough();
  auto& m = cfg.mc;
  std::optional<double> residual;
  bool no_standardize = false;
  mc->add_option("--activation", m.activation, "Activation name")->capture_default_str();
  mc->add_option("--sigma-w2", m.sigma_w2, "Weight variance")->capture_default_str();
  mc->add_option("--sigma-b2", m.sigma_b2, "Bias variance")->capture_default_str();
  mc->add_option("--width", m.width, "Hidden width")->capture_default_str();
  mc->add_option("--depth", m.depth, "Number of affine layers")->capture_default_str();
  mc->add_option("--input-dim", m.input_dim, "Input dimension (0: width, or the data columns)")
      ->capture_default_str();
  mc->add_option("--samples", m.samples, "Dataset size")->capture_default_str();
  mc->add_option("--ensemble", m.ensemble, "Independent network realizations")
      ->capture_default_str();
  mc->add_option("--classes", m.classes, "Output classes")->capture_default_str();
  mc->add_option("--pairs", m.pairs, "Input pairs for covariance estimators")
      ->capture_default_str();
  mc->add_option("--measure", m.measure, "Any of mf, igb, g0, grads")->delimiter(',');
  mc->add_option("--data", m.data, "CSV dataset (rows = samples)");
  mc->add_flag("--no-standardize", no_standardize, "Use the dataset columns as given");
  mc->add_option("--residual", residual,
                 "Residual hidden layers with branch scale depth^(-exponent) (1 or 0.5)");

  auto* g0 = app.add_subcommand("g0", "Histogram of the reference-class fraction law");
  g0->fallthrough();
  auto& g = cfg.g0;
  g0->add_option("--gamma", g.gamma, "Drift ratio at the output")->capture_default_str();
  g0->add_option("--draws", g.draws, "Number of draws")->capture_default_str();
  g0->add_option("--bins", g.bins, "Histogram bins")->capture_default_str();

  auto* sc = app.add_subcommand("self-check", "Validate output schemas and replay determinism");
  sc->fallthrough();
  sc->add_option("files", cfg.self_check.files, "Output files to validate (default: built-in run)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& ok) {
    return app.exit(ok, log, err);
  } catch (const CLI::ParseError& pe) {
    app.exit(pe, log, err);
    return kExitUsage;
  }

  try {
    const auto subs = app.get_subcommands();
    if (!config_file.empty()) {
      if (!subs.empty()) throw DomainError("--config cannot be combined with a subcommand");
      cfg = load_run_config(config_file);
    } else {
      if (subs.empty())
        throw DomainError("a subcommand is required (" + join(command_names()) + ")");
      cfg.command = subs.front()->get_name();
      p.sw_range = parse_range(sw_range);
      p.sb_range = parse_range(sb_range);
      m.standardize = !no_standardize;
      m.residual = residual;
    }
    return execute(cfg, out, threads, log, err);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return ex.category() == Error::Category::Usage ? kExitUsage : kExitNumeric;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitNumeric;
  }
}

}  // namespace critnet::cli
