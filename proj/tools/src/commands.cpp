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

#include "critnet_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "critnet/ensemble.hpp"
#include "critnet/eoc.hpp"
#include "critnet/errors.hpp"
#include "critnet/parallel.hpp"
#include "critnet/propagation.hpp"
#include "critnet/stats.hpp"

namespace critnet::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

InitHyper hyper_of(double sw, double sb) {
  InitHyper h{sw, sb};
  h.validate();
  return h;
}

bool is_relu_family(const ActivationSpec& act) {
  if (act.arity == 1) return act.name == "relu";
  return act.base && act.base->name == "relu";
}

Row stats_row(const LayerStats& s) {
  return {std::int64_t{s.layer}, s.lambda, s.q, s.c, s.gamma, s.chi_tilde, s.chi1, s.sd2, s.sc2};
}

// JSON cannot hold non-finite numbers; they are written as strings.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

json band_json(const Band& b) { return json{{"lo", num(b.lo)}, {"mid", num(b.mid)}, {"hi", num(b.hi)}}; }

}  // namespace

QuadratureSpec quadrature_of(const GlobalOptions& g) {
  QuadratureSpec q;
  q.backend = quad_backend_from_string(g.quad_backend);
  q.node_count = g.quad_nodes;
  q.validate();
  return q;
}

// ---- depth-trace -------------------------------------------------------------

std::vector<Row> compute_depth_trace(const RunConfig& cfg) {
  const auto& p = cfg.depth_trace;
  const ActivationPtr act = activation_by_name(p.activation);
  const InitHyper h = hyper_of(p.sigma_w2, p.sigma_b2);
  const QuadratureSpec quad = quadrature_of(cfg.global);
  if (p.depth < 1) throw DomainError("--depth must be >= 1");
  if (!(p.lambda0 > 0.0) || !std::isfinite(p.lambda0)) throw DomainError("--lambda0 must be > 0");
  if (!(p.q0 >= 0.0) || !(p.q0 < p.lambda0))
    throw DomainError("--q0 must satisfy 0 <= q0 < lambda0");
  std::vector<Row> rows;
  if (!p.igb_coords) {
    const DepthTrace trace =
        depth_trace(*act, h, p.depth, LayerStats::from_lambda_q(0, p.lambda0, p.q0), quad);
    for (const auto& s : trace.layers) rows.push_back(stats_row(s));
    return rows;
  }
  // Iterate the data/centres recursion and report it in the same columns.
  double sd2 = p.lambda0 - p.q0;
  double sc2 = p.q0;
  for (int l = 0; l <= p.depth; ++l) {
    LayerStats s = LayerStats::from_lambda_sd2(l, sd2 + sc2, sd2);
    s.sc2 = sc2;
    const bool last = l == p.depth;
    IgbState next{};
    if (!last) next = step_igb(*act, h, sd2, sc2, quad);
    s.chi_tilde = chi_tilde(*act, h, s.lambda, quad);
    s.alpha = alpha(*act, h, s.lambda, quad);
    const double lambda_next = last ? variance_map(*act, h, s.lambda, quad) : next.sd2 + next.sc2;
    s.chi1 = s.lambda / lambda_next * s.chi_tilde;
    rows.push_back(stats_row(s));
    if (last) break;
    if (!std::isfinite(next.sd2 + next.sc2) || next.sd2 + next.sc2 > kDivergenceThreshold ||
        !(next.sd2 > 0.0))
      break;
    sd2 = next.sd2;
    sc2 = next.sc2;
  }
  return rows;
}

// ---- phase-diagram -------------------------------------------------------------

std::vector<Row> compute_phase_diagram(const RunConfig& cfg, int threads) {
  const auto& p = cfg.phase_diagram;
  const ActivationPtr act = activation_by_name(p.activation);
  PhaseOptions opts;
  opts.eoc_tolerance = p.eoc_tolerance;
  opts.horizon = p.horizon;
  opts.quad = quadrature_of(cfg.global);
  const auto sw = p.sw_range.points();
  const auto sb = p.sb_range.points();
  for (double v : sw)
    if (!(v > 0.0)) throw DomainError("--sw-range must lie in (0, inf)");
  for (double v : sb)
    if (!(v >= 0.0)) throw DomainError("--sb-range must lie in [0, inf)");
  std::vector<Phase> phases(sw.size() * sb.size());
  parallel_for(phases.size(), threads, [&](std::size_t k) {
    const std::size_t j = k / sw.size();
    const std::size_t i = k % sw.size();
    phases[k] = classify_phase(*act, hyper_of(sw[i], sb[j]), opts);
  });
  std::vector<Row> rows;
  rows.reserve(phases.size());
  for (std::size_t k = 0; k < phases.size(); ++k) {
    const Phase& ph = phases[k];
    rows.push_back({sb[k / sw.size()], sw[k % sw.size()], to_string(ph.label), ph.c_star,
                    ph.chi_limit, to_string(ph.fate), ph.ambiguous});
  }
  return rows;
}

// ---- eoc ---------------------------------------------------------------------

EocOutput compute_eoc(const RunConfig& cfg) {
  const auto& p = cfg.eoc;
  const ActivationPtr act = activation_by_name(p.activation);
  EocOutput out;
  auto row = [](const EocPoint& e) -> Row {
    return {e.sigma_b2, e.sigma_w2, e.q_star, e.res_var, e.res_chi, e.note};
  };
  if (is_relu_family(*act)) {
    out.rows.push_back(row(eoc_relu_family(*act)));
    return out;
  }
  const EocCurve curve =
      eoc_curve(*act, default_q_grid(p.points, p.q_min, p.q_max), quadrature_of(cfg.global));
  for (const auto& e : curve.points) out.rows.push_back(row(e));
  if (curve.empty) out.diagnostic = curve.diagnostic;
  return out;
}

// ---- g0 ----------------------------------------------------------------------

std::vector<Row> compute_g0(const RunConfig& cfg) {
  const auto& p = cfg.g0;
  if (!(p.gamma >= 0.0)) throw DomainError("--gamma must be >= 0");
  if (p.draws < 1) throw DomainError("--draws must be >= 1");
  if (p.bins < 1) throw DomainError("--bins must be >= 1");
  const auto samples = sample_g0_law(p.gamma, static_cast<std::size_t>(p.draws), cfg.global.seed);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(p.bins), 0);
  for (double g : samples) {
    const auto b = std::min<std::int64_t>(static_cast<std::int64_t>(g * p.bins), p.bins - 1);
    ++counts[static_cast<std::size_t>(std::max<std::int64_t>(b, 0))];
  }
  std::vector<Row> rows;
  for (int b = 0; b < p.bins; ++b) {
    const double lo = static_cast<double>(b) / p.bins;
    const double hi = static_cast<double>(b + 1) / p.bins;
    const double density = static_cast<double>(counts[b]) * p.bins / static_cast<double>(p.draws);
    rows.push_back({lo, hi, counts[b], density});
  }
  return rows;
}

// ---- mc ----------------------------------------------------------------------

McPaths mc_paths(const std::string& out) {
  std::string stem = out;
  if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".json") stem.resize(stem.size() - 5);
  return {out, stem + "_layers.csv", stem + "_grads.csv", stem + "_g0.csv"};
}

namespace {

// Mean-field prediction aligned with the simulated architecture: residual
// layers add the branch map to the carried state, plain layers replace it.
std::vector<LayerStats> theory_trace(const ActivationSpec& act, const InitHyper& h,
                                     const Network& net, const LayerStats& init,
                                     const QuadratureSpec& quad) {
  const int depth = net.arch().depth;
  std::vector<LayerStats> out{init};
  LayerStats cur = init;
  for (int l = 1; l <= depth; ++l) {
    const LayerStats branch = step_mf(act, h, cur, quad);
    LayerStats next;
    if (net.is_residual(l)) {
      const double s2 = net.branch_scale(l) * net.branch_scale(l);
      next = LayerStats::from_lambda_sd2(l, cur.lambda + s2 * branch.lambda, cur.sd2 + s2 * branch.sd2);
    } else {
      next = branch;
      next.layer = l;
    }
    if (!next.finite || !std::isfinite(next.lambda) || next.lambda > kDivergenceThreshold) break;
    out.push_back(next);
    cur = next;
  }
  return out;
}

}  // namespace

McOutput compute_mc(const RunConfig& cfg, int threads) {
  const auto& p = cfg.mc;
  const ActivationPtr act = activation_by_name(p.activation);
  const InitHyper h = hyper_of(p.sigma_w2, p.sigma_b2);
  const QuadratureSpec quad = quadrature_of(cfg.global);

  bool want_mf = false, want_igb = false, want_g0 = false, want_grads = false;
  for (const auto& m : p.measure) {
    if (m == "mf") want_mf = true;
    else if (m == "igb") want_igb = true;
    else if (m == "g0") want_g0 = true;
    else if (m == "grads") want_grads = true;
    else throw DomainError("unknown --measure value '" + m + "' (expected mf, igb, g0 or grads)");
  }
  if (p.measure.empty()) throw DomainError("--measure needs at least one of mf, igb, g0, grads");

  std::optional<Eigen::MatrixXd> data;
  int input_dim = p.input_dim > 0 ? p.input_dim : p.width;
  if (!p.data.empty()) {
    data = read_csv_matrix(p.data, p.standardize);
    if (p.input_dim > 0 && data->cols() != p.input_dim)
      throw DomainError("dataset dimension mismatch: '" + p.data + "' has " +
                        std::to_string(data->cols()) + " columns but --input-dim is " +
                        std::to_string(p.input_dim));
    input_dim = static_cast<int>(data->cols());
  }

  EnsembleConfig ec;
  ec.arch.depth = p.depth;
  ec.arch.width = p.width;
  ec.arch.input_dim = input_dim;
  ec.arch.output_dim = p.classes;
  ec.arch.activation = act;
  if (p.residual) ec.arch.residual = ResidualSpec{*p.residual};
  ec.hyper = h;
  ec.n_samples = p.samples;
  ec.n_realizations = p.ensemble;
  ec.seed = cfg.global.seed;
  ec.pair_count = p.pairs;
  ec.measure_forward = want_mf || want_igb;
  ec.measure_g0 = want_g0;
  ec.measure_grads = want_grads;
  ec.threads = threads;
  const EnsembleMeasurement m = run_ensemble(ec, data);

  // Theory starts from the input statistics: exactly (1, 0) for the
  // synthetic Gaussian inputs, the measured layer-0 medians for a dataset.
  LayerStats init = LayerStats::from_lambda_q(0, 1.0, 0.0);
  if (data && !m.layers.empty())
    init = LayerStats::from_lambda_q(0, m.layers[0].lambda.mid, std::max(0.0, m.layers[0].q.mid));
  const Network net(ec.arch, h, ec.seed, 0);
  const std::vector<LayerStats> theory = theory_trace(*act, h, net, init, quad);
  auto theory_at = [&](int l) -> const LayerStats* {
    return l < static_cast<int>(theory.size()) ? &theory[l] : nullptr;
  };

  McOutput out;
  json layers = json::array();
  json inside = json::array();
  int compared = 0, c_inside = 0;
  for (const auto& lb : m.layers) {
    const LayerStats* t = theory_at(lb.layer);
    const bool lam_in = t && t->lambda >= lb.lambda.lo && t->lambda <= lb.lambda.hi;
    const bool c_in = t && t->c >= lb.c.lo && t->c <= lb.c.hi;
    if (t) {
      ++compared;
      c_inside += c_in;
    }
    inside.push_back(c_in);
    layers.push_back(json{{"layer", lb.layer},
                          {"realizations", lb.realizations},
                          {"lambda", band_json(lb.lambda)},
                          {"q", band_json(lb.q)},
                          {"c", band_json(lb.c)},
                          {"sd2", band_json(lb.sd2)},
                          {"sc2", band_json(lb.sc2)},
                          {"gamma", band_json(lb.gamma)}});
    Row row{std::int64_t{lb.layer}, std::int64_t{lb.realizations}};
    for (const Band* b : {&lb.lambda, &lb.q, &lb.c, &lb.sd2, &lb.sc2, &lb.gamma}) {
      row.push_back(b->lo);
      row.push_back(b->mid);
      row.push_back(b->hi);
    }
    if (t) {
      for (double v : {t->lambda, t->q, t->c, t->sd2, t->sc2, t->gamma}) row.push_back(v);
    } else {
      for (int i = 0; i < 6; ++i) row.push_back(kNaN);
    }
    row.push_back(lam_in);
    row.push_back(c_in);
    out.layers.push_back(std::move(row));
  }

  std::vector<double> profile;
  if (want_grads && !ec.arch.residual) profile = gradient_profile(*act, h, p.depth, quad, init.lambda);
  json grads = json::array();
  for (const auto& g : m.grads) {
    const double tp = g.layer < static_cast<int>(profile.size()) ? profile[g.layer] : kNaN;
    grads.push_back(json{{"layer", g.layer},
                         {"all", num(g.all)},
                         {"favored", num(g.favored)},
                         {"unfavored", num(g.unfavored)},
                         {"cross", num(g.cross)},
                         {"normalized", num(g.normalized)},
                         {"theory_profile", num(tp)}});
    out.grads.push_back({std::int64_t{g.layer}, g.all, g.favored, g.unfavored, g.cross, g.normalized, tp});
  }

  const LayerStats* out_theory = theory_at(p.depth);
  const double gamma_out = out_theory ? out_theory->gamma : kNaN;
  json summary{{"layers_compared", compared},
               {"c_inside_band", c_inside},
               {"c_inside_fraction", compared ? num(static_cast<double>(c_inside) / compared) : json(nullptr)},
               {"theory_gamma_output", num(gamma_out)}};
  for (std::size_t r = 0; r < m.g0_samples.size(); ++r)
    out.g0.push_back({static_cast<std::int64_t>(r), m.g0_samples[r], m.max_class_freq[r], gamma_out});
  if (want_g0 && !m.g0_samples.empty() && std::isfinite(gamma_out)) {
    const double d = ks_statistic(m.g0_samples, [&](double g) { return g0_law_cdf(gamma_out, g); });
    summary["g0_ks_statistic"] = d;
    summary["g0_ks_pvalue"] = ks_pvalue(d, m.g0_samples.size());
  }

  json theory_json = json::array();
  for (const auto& t : theory)
    theory_json.push_back(json{{"layer", t.layer}, {"lambda", num(t.lambda)}, {"q", num(t.q)},
                               {"c", num(t.c)}, {"sd2", num(t.sd2)}, {"sc2", num(t.sc2)},
                               {"gamma", num(t.gamma)}});
  json g0s = json::array();
  for (double g : m.g0_samples) g0s.push_back(num(g));
  json mcf = json::array();
  for (double g : m.max_class_freq) mcf.push_back(num(g));
  out.report = json{{"measurement",
                     {{"layers", layers},
                      {"g0_samples", g0s},
                      {"max_class_freq", mcf},
                      {"grads", grads},
                      {"diverged_at_layer", m.diverged_at_layer}}},
                    {"theory", {{"layers", theory_json}}},
                    {"inside_band", inside},
                    {"summary", summary}};
  return out;
}

// ---- self-check ----------------------------------------------------------------

namespace {

std::string without_timestamp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("# timestamp: ", 0) != 0 && line.find("\"timestamp\"") == std::string::npos)
      os << line << '\n';
  return os.str();
}

int self_check(const RunConfig& cfg, int threads, std::ostream& log, std::ostream& err) {
  int failures = 0;
  auto report = [&](const std::string& what, const Validation& v) {
    if (v.ok()) {
      log << "PASS " << what << " (" << v.schema_id << ", " << v.rows << " rows)\n";
      return;
    }
    ++failures;
    log << "FAIL " << what << '\n';
    for (const auto& p : v.problems) log << "  " << p << '\n';
  };
  if (!cfg.self_check.files.empty()) {
    for (const auto& f : cfg.self_check.files) report(f, validate_csv(f));
    return failures ? kExitNumeric : kExitOk;
  }

  // Built-in battery: small runs of every command, validated against their
  // schemas, plus a replay of each embedded config.
  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() / ("critnet-self-check-" + std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  std::vector<std::pair<RunConfig, std::string>> runs;
  auto add = [&](RunConfig c, const std::string& file) {
    c.global = cfg.global;
    runs.emplace_back(std::move(c), (dir / file).string());
  };
  RunConfig c;
  c.command = "depth-trace";
  c.depth_trace.depth = 12;
  add(c, "depth-trace.csv");
  c.depth_trace.activation = "tanh";
  c.depth_trace.sigma_w2 = 3.0;
  c.depth_trace.sigma_b2 = 0.1;
  c.depth_trace.igb_coords = true;
  add(c, "depth-trace-igb.csv");
  c = RunConfig{};
  c.command = "phase-diagram";
  c.phase_diagram.activation = "relu";
  c.phase_diagram.sw_range = {1.5, 2.5, 3};
  c.phase_diagram.sb_range = {0.0, 0.1, 2};
  add(c, "phase-diagram.csv");
  c = RunConfig{};
  c.command = "eoc";
  c.eoc.activation = "tanh";
  c.eoc.points = 8;
  add(c, "eoc.csv");
  c.eoc.activation = "relu+maxpool";
  add(c, "eoc-relu-maxpool.csv");
  c = RunConfig{};
  c.command = "g0";
  c.g0.draws = 2000;
  add(c, "g0.csv");
  c = RunConfig{};
  c.command = "mc";
  c.mc.width = 16;
  c.mc.depth = 4;
  c.mc.samples = 12;
  c.mc.ensemble = 3;
  c.mc.measure = {"mf", "igb", "g0", "grads"};
  add(c, "mc.json");

  for (const auto& [run, file] : runs) {
    std::ostringstream quiet;
    execute(run, file, threads, quiet, quiet);
    std::vector<std::string> csvs;
    if (run.command == "mc") {
      const McPaths paths = mc_paths(file);
      csvs = {paths.layers, paths.grads, paths.g0};
    } else {
      csvs = {file};
    }
    for (const auto& f : csvs) report(run.command + " " + fs::path(f).filename().string(), validate_csv(f));

    // Replay from the embedded config and compare everything but the timestamp.
    const RunConfig replay = load_run_config(file);
    const std::string again = file + ".replay" + (run.command == "mc" ? ".json" : ".csv");
    execute(replay, again, threads, quiet, quiet);
    std::vector<std::pair<std::string, std::string>> pairs{{file, again}};
    if (run.command == "mc") {
      const McPaths a = mc_paths(file);
      const McPaths b = mc_paths(again);
      pairs = {{a.report, b.report}, {a.layers, b.layers}, {a.grads, b.grads}, {a.g0, b.g0}};
    }
    bool same = true;
    for (const auto& [x, y] : pairs) {
      // Paths of companion files differ by construction; compare content only.
      same = same && without_timestamp(x) == without_timestamp(y);
    }
    if (same) {
      log << "PASS replay " << fs::path(file).filename().string() << '\n';
    } else {
      ++failures;
      log << "FAIL replay " << fs::path(file).filename().string() << ": output differs\n";
    }
  }

  // Config round trip and strictness.
  for (const auto& [run, file] : runs) {
    const json j = to_json(run);
    if (to_json(run_config_from_json(j)) != j) {
      ++failures;
      log << "FAIL config round trip for " << run.command << '\n';
    }
  }
  json bad = to_json(runs.front().first);
  bad["params"]["no_such_key"] = 1;
  bool rejected = false;
  try {
    run_config_from_json(bad);
  } catch (const DomainError&) {
    rejected = true;
  }
  if (rejected) {
    log << "PASS config rejects unknown keys\n";
  } else {
    ++failures;
    log << "FAIL config accepted an unknown key\n";
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  if (failures) err << "self-check: " << failures << " failure(s)\n";
  return failures ? kExitNumeric : kExitOk;
}

}  // namespace

// ---- dispatch ------------------------------------------------------------------

int execute(const RunConfig& cfg, const std::string& out, int threads, std::ostream& log,
            std::ostream& err) {
  threads = resolve_threads(threads);
  const std::string& cmd = cfg.command;
  quadrature_of(cfg.global);  // reject a bad backend or node count up front
  if (cmd == "self-check") return self_check(cfg, threads, log, err);
  if (out.empty()) throw DomainError("--out is required");
  const RunMetadata prov = make_metadata(cfg);
  if (cmd == "depth-trace") {
    write_csv(out, schema("depth-trace"), prov, compute_depth_trace(cfg));
  } else if (cmd == "phase-diagram") {
    write_csv(out, schema("phase-diagram"), prov, compute_phase_diagram(cfg, threads));
  } else if (cmd == "eoc") {
    const EocOutput e = compute_eoc(cfg);
    write_csv(out, schema("eoc"), prov, e.rows);
    if (!e.diagnostic.empty()) err << "note: " << e.diagnostic << '\n';
  } else if (cmd == "g0") {
    write_csv(out, schema("g0"), prov, compute_g0(cfg));
  } else if (cmd == "mc") {
    const McOutput mc = compute_mc(cfg, threads);
    const McPaths paths = mc_paths(out);
    write_json_report(paths.report, "mc-report/1", prov, mc.report);
    if (!mc.layers.empty()) write_csv(paths.layers, schema("mc-layers"), prov, mc.layers);
    if (!mc.grads.empty()) write_csv(paths.grads, schema("mc-grads"), prov, mc.grads);
    if (!mc.g0.empty()) write_csv(paths.g0, schema("mc-g0"), prov, mc.g0);
  } else {
    throw DomainError("unknown command '" + cmd + "'");
  }
  log << "wrote " << out << '\n';
  return kExitOk;
}

}  // namespace critnet::cli
