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

#include "critnet/ensemble.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "critnet/errors.hpp"
#include "critnet/parallel.hpp"
#include "critnet/rng.hpp"
#include "critnet/special.hpp"

namespace critnet {

namespace {

// Stream domains; the network streams use the realization index as domain.
constexpr std::uint64_t kDataDomain = 0x8000000000000001ULL;
constexpr std::uint64_t kPairDomain = 0x8000000000000002ULL;
constexpr std::uint64_t kLabelDomain = 0x8000000000000003ULL;
constexpr std::uint64_t kG0Domain = 0x8000000000000004ULL;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

// ---- architecture ------------------------------------------------------------

int ArchSpec::layer_width(int l) const {
  if (l == 0) return input_dim;
  if (l == depth) return output_dim;
  return width;
}

void ArchSpec::validate() const {
  if (depth < 1) throw DomainError("depth must be >= 1");
  if (width < 1) throw DomainError("width must be >= 1");
  if (input_dim < 1) throw DomainError("input_dim must be >= 1");
  if (output_dim < 2) throw DomainError("output_dim must be >= 2");
  if (!activation) throw DomainError("activation is not set");
  if (activation->arity == 2) {
    // Every layer that feeds a pooled activation must have even width.
    for (int l = 0; l < depth; ++l)
      if (layer_width(l) % 2 != 0)
        throw DomainError("pooled activations require even layer widths (input_dim and width)");
  }
  if (residual && !std::isfinite(residual->scale_exponent))
    throw DomainError("residual scale exponent must be finite");
}

void EnsembleConfig::validate() const {
  arch.validate();
  hyper.validate();
  if (n_samples < 2) throw DomainError("n_samples must be >= 2");
  if (n_realizations < 1) throw DomainError("n_realizations must be >= 1");
  if (pair_count < 1) throw DomainError("pair_count must be >= 1");
}

// ---- data ------------------------------------------------------------------

Eigen::MatrixXd make_dataset(int n, int dim, std::uint64_t seed) {
  if (n < 1 || dim < 1) throw DomainError("make_dataset: n and dim must be >= 1");
  Eigen::MatrixXd x(n, dim);
  RandomStream rng(seed, kDataDomain);
  // Fill row by row so that a prefix of rows does not depend on n.
  std::vector<double> row(static_cast<std::size_t>(dim));
  for (int i = 0; i < n; ++i) {
    rng.fill_normal(row);
    for (int j = 0; j < dim; ++j) x(i, j) = row[j];
  }
  return x;
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool standardize) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open data file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    bool numeric = true;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      const auto b = field.find_first_not_of(" \t");
      const auto e = field.find_last_not_of(" \t");
      const std::string f = b == std::string::npos ? "" : field.substr(b, e - b + 1);
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw DomainError("data file '" + path + "': non-numeric value on line " + std::to_string(line_no));
    }
    for (double v : row)
      if (!std::isfinite(v))
        throw DomainError("data file '" + path + "': non-finite value on line " + std::to_string(line_no));
    if (!rows.empty() && row.size() != rows.front().size())
      throw DomainError("data file '" + path + "': ragged row on line " + std::to_string(line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DomainError("data file '" + path + "' has no data rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rows[i][j];
  if (standardize) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double mean = x.col(j).mean();
      x.col(j).array() -= mean;
      const double sd = std::sqrt(x.col(j).squaredNorm() / static_cast<double>(n));
      if (sd > 0.0) x.col(j) /= sd;
    }
  }
  return x;
}

// ---- networks ----------------------------------------------------------------

Network::Network(ArchSpec arch, InitHyper hyper, std::uint64_t seed, std::uint64_t realization)
    : arch_(std::move(arch)), hyper_(hyper), seed_(seed), realization_(realization) {
  arch_.validate();
  hyper_.validate();
}

Eigen::MatrixXd Network::weights(int l) const {
  if (l < 1 || l > arch_.depth) throw DomainError("Network::weights: layer out of range");
  const int rows = arch_.layer_width(l);
  const int cols = arch_.layer_width(l - 1);
  Eigen::MatrixXd w(rows, cols);
  RandomStream rng(seed_, realization_, 2 * static_cast<std::uint64_t>(l));
  rng.fill_normal(std::span<double>(w.data(), static_cast<std::size_t>(w.size())),
                  std::sqrt(hyper_.sigma_w2 / cols));
  return w;
}

Eigen::VectorXd Network::bias(int l) const {
  if (l < 1 || l > arch_.depth) throw DomainError("Network::bias: layer out of range");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(arch_.layer_width(l));
  if (hyper_.sigma_b2 == 0.0) return b;
  RandomStream rng(seed_, realization_, 2 * static_cast<std::uint64_t>(l) + 1);
  rng.fill_normal(std::span<double>(b.data(), static_cast<std::size_t>(b.size())),
                  std::sqrt(hyper_.sigma_b2));
  return b;
}

bool Network::is_residual(int l) const {
  return arch_.residual && l >= 2 && l <= arch_.depth - 1 &&
         arch_.layer_width(l) == arch_.layer_width(l - 1);
}

double Network::branch_scale(int l) const {
  if (!is_residual(l)) return 1.0;
  return std::pow(static_cast<double>(arch_.depth), -arch_.residual->scale_exponent);
}

Network sample_network(const ArchSpec& arch, const InitHyper& hyper, std::uint64_t seed,
                       std::uint64_t realization) {
  return Network(arch, hyper, seed, realization);
}

// ---- forward ---------------------------------------------------------------

namespace {

Eigen::MatrixXd apply_activation(const ActivationSpec& act, const Eigen::MatrixXd& h) {
  Eigen::MatrixXd a(h.rows(), h.cols());
  if (act.arity == 1) {
    const double* src = h.data();
    double* dst = a.data();
    for (Eigen::Index i = 0; i < h.size(); ++i) dst[i] = act.value(src[i]);
    return a;
  }
  for (Eigen::Index col = 0; col < h.cols(); ++col) {
    for (Eigen::Index k = 0; k + 1 < h.rows(); k += 2) {
      const Pair v = act.value2(h(k, col), h(k + 1, col));
      a(k, col) = v[0];
      a(k + 1, col) = v[1];
    }
  }
  return a;
}

// Multiplies the upstream gradient g (with respect to the activation outputs)
// by the Jacobian of the activation at h.
Eigen::MatrixXd activation_backward(const ActivationSpec& act, const Eigen::MatrixXd& h,
                                    const Eigen::MatrixXd& g) {
  Eigen::MatrixXd out(h.rows(), h.cols());
  if (act.arity == 1) {
    for (Eigen::Index i = 0; i < h.size(); ++i) out.data()[i] = act.derivative(h.data()[i]) * g.data()[i];
    return out;
  }
  // Both output slots of a window carry the same value, so the upstream
  // gradients of the two slots add up.
  for (Eigen::Index col = 0; col < h.cols(); ++col) {
    for (Eigen::Index k = 0; k + 1 < h.rows(); k += 2) {
      const Pair d = act.grad2(h(k, col), h(k + 1, col));
      const double up = g(k, col) + g(k + 1, col);
      out(k, col) = d[0] * up;
      out(k + 1, col) = d[1] * up;
    }
  }
  return out;
}

}  // namespace

ForwardPass forward(const Network& net, const Eigen::MatrixXd& inputs) {
  const ArchSpec& arch = net.arch();
  if (inputs.rows() != arch.input_dim)
    throw DomainError("forward: input dimension " + std::to_string(inputs.rows()) +
                      " does not match input_dim " + std::to_string(arch.input_dim));
  ForwardPass pass;
  pass.h.reserve(static_cast<std::size_t>(arch.depth) + 1);
  pass.h.push_back(inputs);
  for (int l = 1; l <= arch.depth; ++l) {
    const Eigen::MatrixXd a = apply_activation(*arch.activation, pass.h.back());
    Eigen::MatrixXd z = net.weights(l) * a;
    z.colwise() += net.bias(l);
    if (net.is_residual(l)) z = pass.h.back() + net.branch_scale(l) * z;
    if (!z.allFinite()) {
      pass.diverged_at = l;
      break;
    }
    pass.h.push_back(std::move(z));
  }
  return pass;
}

std::vector<SamplePair> sample_pairs(int n_samples, int count, std::uint64_t seed) {
  if (n_samples < 2) throw DomainError("sample_pairs: need at least two samples");
  const long long total = static_cast<long long>(n_samples) * (n_samples - 1) / 2;
  std::vector<SamplePair> out;
  if (count >= total) {
    for (int a = 0; a < n_samples; ++a)
      for (int b = a + 1; b < n_samples; ++b) out.emplace_back(a, b);
    return out;
  }
  RandomStream rng(seed, kPairDomain);
  std::set<SamplePair> chosen;
  while (static_cast<int>(chosen.size()) < count) {
    int a = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_samples)));
    int b = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_samples)));
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    chosen.emplace(a, b);
  }
  out.assign(chosen.begin(), chosen.end());
  return out;
}

std::vector<LayerFragment> forward_stats(const ForwardPass& pass,
                                         const std::vector<SamplePair>& pairs) {
  std::vector<LayerFragment> out;
  out.reserve(pass.h.size());
  for (const Eigen::MatrixXd& h : pass.h) {
    const Eigen::Index n = h.rows();
    const Eigen::Index p = h.cols();
    LayerFragment f;
    f.lambda.resize(static_cast<std::size_t>(p));
    for (Eigen::Index a = 0; a < p; ++a) {
      long double s = 0.0L;
      const double* col = h.col(a).data();
      for (Eigen::Index i = 0; i < n; ++i) s += static_cast<long double>(col[i]) * col[i];
      f.lambda[a] = static_cast<double>(s / n);
    }
    f.q.reserve(pairs.size());
    f.c.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      long double s = 0.0L;
      const double* ca = h.col(a).data();
      const double* cb = h.col(b).data();
      for (Eigen::Index i = 0; i < n; ++i) s += static_cast<long double>(ca[i]) * cb[i];
      const double q = static_cast<double>(s / n);
      f.q.push_back(q);
      const double denom = std::sqrt(f.lambda[a] * f.lambda[b]);
      f.c.push_back(denom > 0.0 ? q / denom : kNaN);
    }
    long double sd2 = 0.0L;
    long double sc2 = 0.0L;
    for (Eigen::Index i = 0; i < n; ++i) {
      long double m = 0.0L;
      for (Eigen::Index a = 0; a < p; ++a) m += h(i, a);
      m /= p;
      long double v = 0.0L;
      for (Eigen::Index a = 0; a < p; ++a) {
        const long double d = h(i, a) - m;
        v += d * d;
      }
      sd2 += v / p;
      sc2 += m * m;
    }
    f.sd2 = static_cast<double>(sd2 / n);
    f.sc2 = static_cast<double>(sc2 / n);
    out.push_back(std::move(f));
  }
  return out;
}

G0Result measure_g0(const Eigen::MatrixXd& outputs) {
  const Eigen::Index k = outputs.rows();
  const Eigen::Index p = outputs.cols();
  if (k < 2) throw DomainError("measure_g0: need at least two outputs");
  if (p < 1) throw DomainError("measure_g0: no samples");
  G0Result r;
  r.class_freq.assign(static_cast<std::size_t>(k), 0.0);
  std::size_t first_wins = 0;
  for (Eigen::Index a = 0; a < p; ++a) {
    if (outputs(0, a) > outputs(1, a)) ++first_wins;
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < k; ++j)
      if (outputs(j, a) > outputs(best, a)) best = j;
    r.class_freq[best] += 1.0;
  }
  for (double& f : r.class_freq) f /= static_cast<double>(p);
  r.g0 = static_cast<double>(first_wins) / static_cast<double>(p);
  r.max_class_freq = *std::max_element(r.class_freq.begin(), r.class_freq.end());
  return r;
}

std::vector<int> random_labels(int n, int classes, std::uint64_t seed) {
  if (n < 1 || classes < 2) throw DomainError("random_labels: need n >= 1 and classes >= 2");
  RandomStream rng(seed, kLabelDomain);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int& v : y) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return y;
}

GradientPass backward_gradients(const Network& net, const ForwardPass& pass,
                                const std::vector<int>& labels,
                                const std::vector<SamplePair>& pairs) {
  const ArchSpec& arch = net.arch();
  if (pass.diverged_at >= 0 || static_cast<int>(pass.h.size()) != arch.depth + 1)
    throw DomainError("backward_gradients: the forward pass overflowed");
  const Eigen::MatrixXd& out = pass.h.back();
  const Eigen::Index k = out.rows();
  const Eigen::Index p = out.cols();
  if (static_cast<Eigen::Index>(labels.size()) != p)
    throw DomainError("backward_gradients: one label per sample is required");

  // Softmax cross-entropy gradient. The component of the true class,
  // p_y - 1, is formed as -sum_{j != y} p_j so that it keeps its relative
  // accuracy when p_y rounds to 1.
  Eigen::MatrixXd delta(k, p);
  Eigen::VectorXd mean_prob = Eigen::VectorXd::Zero(k);
  for (Eigen::Index a = 0; a < p; ++a) {
    const double mx = out.col(a).maxCoeff();
    Eigen::VectorXd e = (out.col(a).array() - mx).exp();
    const double z = e.sum();
    e /= z;
    mean_prob += e;
    const int y = labels[a];
    if (y < 0 || y >= k) throw DomainError("backward_gradients: label out of range");
    double others = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (j == y) continue;
      delta(j, a) = e(j);
      others += e(j);
    }
    delta(y, a) = -others;
  }
  GradientPass g;
  mean_prob.maxCoeff(&g.favored);

  const auto layers = static_cast<std::size_t>(arch.depth) + 1;
  g.sq.assign(layers, {});
  g.cross.assign(layers, kNaN);
  auto record = [&](int l, const Eigen::MatrixXd& d) {
    std::vector<double>& s = g.sq[l];
    s.resize(static_cast<std::size_t>(p));
    for (Eigen::Index a = 0; a < p; ++a) {
      long double acc = 0.0L;
      for (Eigen::Index i = 0; i < d.rows(); ++i) acc += static_cast<long double>(d(i, a)) * d(i, a);
      s[a] = static_cast<double>(acc);
    }
    std::vector<double> cr;
    cr.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      long double acc = 0.0L;
      for (Eigen::Index i = 0; i < d.rows(); ++i) acc += static_cast<long double>(d(i, a)) * d(i, b);
      cr.push_back(static_cast<double>(acc));
    }
    g.cross[l] = median(cr);
  };
  record(arch.depth, delta);
  for (int l = arch.depth; l >= 1; --l) {
    const Eigen::MatrixXd up = net.weights(l).transpose() * delta;
    Eigen::MatrixXd branch = activation_backward(*arch.activation, pass.h[l - 1], up);
    if (net.is_residual(l)) {
      delta = delta + net.branch_scale(l) * branch;
    } else {
      delta = std::move(branch);
    }
    record(l - 1, delta);
  }
  return g;
}

// ---- ensemble --------------------------------------------------------------

namespace {

struct RealizationResult {
  std::vector<LayerFragment> fragments;
  int diverged_at = -1;
  G0Result g0;
  bool has_g0 = false;
  std::vector<double> grad_all, grad_fav, grad_unfav, grad_cross;
};

double median_or_nan(std::vector<double> v) {
  v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
  return v.empty() ? kNaN : median(v);
}

}  // namespace

EnsembleMeasurement run_ensemble(const EnsembleConfig& cfg, const std::optional<Eigen::MatrixXd>& data) {
  cfg.validate();
  const ArchSpec& arch = cfg.arch;
  Eigen::MatrixXd inputs;
  if (data) {
    if (data->cols() != arch.input_dim)
      throw DomainError("dataset has " + std::to_string(data->cols()) + " columns but input_dim is " +
                        std::to_string(arch.input_dim));
    if (data->rows() < 2) throw DomainError("dataset needs at least two rows");
    inputs = data->transpose();
  } else {
    inputs = make_dataset(cfg.n_samples, arch.input_dim, cfg.seed).transpose();
  }
  const int p = static_cast<int>(inputs.cols());
  const auto pairs = sample_pairs(p, cfg.pair_count, cfg.seed);
  std::vector<int> labels;
  if (cfg.measure_grads) labels = random_labels(p, arch.output_dim, cfg.seed);

  std::vector<RealizationResult> results(static_cast<std::size_t>(cfg.n_realizations));
  parallel_for(results.size(), resolve_threads(cfg.threads), [&](std::size_t r) {
    const Network net = sample_network(arch, cfg.hyper, cfg.seed, r);
    const ForwardPass pass = forward(net, inputs);
    RealizationResult& out = results[r];
    out.diverged_at = pass.diverged_at;
    if (cfg.measure_forward) out.fragments = forward_stats(pass, pairs);
    if (pass.diverged_at < 0) {
      if (cfg.measure_g0) {
        out.g0 = measure_g0(pass.h.back());
        out.has_g0 = true;
      }
      if (cfg.measure_grads) {
        const GradientPass gp = backward_gradients(net, pass, labels, pairs);
        const std::size_t layers = gp.sq.size();
        out.grad_all.resize(layers);
        out.grad_fav.resize(layers);
        out.grad_unfav.resize(layers);
        out.grad_cross = gp.cross;
        for (std::size_t l = 0; l < layers; ++l) {
          std::vector<double> fav, unfav;
          for (int a = 0; a < p; ++a) (labels[a] == gp.favored ? fav : unfav).push_back(gp.sq[l][a]);
          out.grad_all[l] = median(gp.sq[l]);
          out.grad_fav[l] = fav.size() >= 2 ? median(fav) : kNaN;
          out.grad_unfav[l] = unfav.size() >= 2 ? median(unfav) : kNaN;
        }
      }
    }
  });

  EnsembleMeasurement m;
  for (const auto& r : results) {
    if (r.diverged_at >= 0 && (m.diverged_at_layer < 0 || r.diverged_at < m.diverged_at_layer))
      m.diverged_at_layer = r.diverged_at;
    if (r.has_g0) {
      m.g0_samples.push_back(r.g0.g0);
      m.max_class_freq.push_back(r.g0.max_class_freq);
    }
  }
  if (cfg.measure_forward) {
    for (int l = 0; l <= arch.depth; ++l) {
      LayerBands lb;
      lb.layer = l;
      std::vector<double> lam, q, c, sd2, sc2, gam;
      for (const auto& r : results) {
        if (static_cast<int>(r.fragments.size()) <= l) continue;
        const LayerFragment& f = r.fragments[l];
        ++lb.realizations;
        lam.insert(lam.end(), f.lambda.begin(), f.lambda.end());
        q.insert(q.end(), f.q.begin(), f.q.end());
        for (double v : f.c)
          if (!std::isnan(v)) c.push_back(v);
        sd2.push_back(f.sd2);
        sc2.push_back(f.sc2);
        gam.push_back(f.sd2 > 0.0 ? f.sc2 / f.sd2 : std::numeric_limits<double>::infinity());
      }
      if (lb.realizations == 0) break;
      lb.lambda = band(lam);
      lb.q = band(q);
      lb.c = band(c);
      lb.sd2 = band(sd2);
      lb.sc2 = band(sc2);
      lb.gamma = band(gam);
      m.layers.push_back(lb);
    }
  }
  if (cfg.measure_grads) {
    for (int l = 0; l <= arch.depth; ++l) {
      std::vector<double> all, fav, unfav, cross;
      for (const auto& r : results) {
        if (r.grad_all.empty()) continue;
        all.push_back(r.grad_all[l]);
        fav.push_back(r.grad_fav[l]);
        unfav.push_back(r.grad_unfav[l]);
        cross.push_back(r.grad_cross[l]);
      }
      GradLayer gl;
      gl.layer = l;
      gl.all = median_or_nan(all);
      gl.favored = median_or_nan(fav);
      gl.unfavored = median_or_nan(unfav);
      gl.cross = median_or_nan(cross);
      m.grads.push_back(gl);
    }
    const double top = m.grads.back().all;
    for (auto& gl : m.grads) gl.normalized = gl.all / top;
  }
  return m;
}

// ---- reference-class fraction law ------------------------------------------

std::vector<double> sample_g0_law(double gamma, std::size_t draws, std::uint64_t seed) {
  if (!(gamma >= 0.0)) throw DomainError("sample_g0_law: gamma must be >= 0");
  RandomStream rng(seed, kG0Domain);
  const double scale = std::sqrt(gamma);
  std::vector<double> out(draws);
  for (double& g : out) {
    const double delta = rng.normal();
    if (std::isinf(gamma)) {
      g = delta > 0.0 ? 1.0 : 0.0;
    } else {
      g = normal_cdf(scale * delta);
    }
  }
  return out;
}

double g0_law_cdf(double gamma, double g) {
  if (!(gamma >= 0.0)) throw DomainError("g0_law_cdf: gamma must be >= 0");
  if (g <= 0.0) return 0.0;
  if (g >= 1.0) return 1.0;
  if (gamma == 0.0) return g >= 0.5 ? 1.0 : 0.0;
  if (std::isinf(gamma)) return 0.5;
  return normal_cdf(normal_quantile(g) / std::sqrt(gamma));
}

}  // namespace critnet
