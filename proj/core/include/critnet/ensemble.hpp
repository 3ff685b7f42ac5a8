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

#include <Eigen/Dense>

#include "critnet/activations.hpp"
#include "critnet/propagation_types.hpp"
#include "critnet/stats.hpp"

namespace critnet {

// Residual variant: hidden layers compute x' = x + depth^(-scale_exponent) (W f(x) + b).
struct ResidualSpec {
  double scale_exponent = 1.0;
};

struct ArchSpec {
  int depth = 10;       // number of affine layers L
  int width = 1000;     // hidden width N
  int input_dim = 1000; // d
  int output_dim = 2;   // classes at layer L
  ActivationPtr activation;
  std::optional<ResidualSpec> residual;

  // Width of layer l (0 = input, depth = output).
  int layer_width(int l) const;
  void validate() const;  // throws DomainError
};

struct EnsembleConfig {
  ArchSpec arch;
  InitHyper hyper;
  int n_samples = 100;      // dataset size P
  int n_realizations = 10;  // independent networks
  std::uint64_t seed = 0;
  int pair_count = 200;     // input pairs used for the covariance estimators
  bool measure_forward = true;
  bool measure_g0 = false;
  bool measure_grads = false;
  int threads = 0;          // 0: CRITNET_THREADS or hardware concurrency

  void validate() const;
};

// n x dim matrix of independent standard normals, deterministic per seed.
Eigen::MatrixXd make_dataset(int n, int dim, std::uint64_t seed);

// Reads a numeric CSV (rows = samples). A first line containing non-numeric
// fields is treated as a header. Columns are standardised to zero mean and
// unit variance unless `standardize` is false. Throws DomainError on
// malformed input.
Eigen::MatrixXd read_csv_matrix(const std::string& path, bool standardize = true);

// A random network. Parameters are not stored: layer l is regenerated on
// demand from the stream keyed by (seed, realization, l), so repeated access
// returns identical values.
class Network {
 public:
  Network(ArchSpec arch, InitHyper hyper, std::uint64_t seed, std::uint64_t realization);

  const ArchSpec& arch() const { return arch_; }
  const InitHyper& hyper() const { return hyper_; }

  // Weights of layer l in [1, depth]: shape (width(l), width(l-1)), entries
  // N(0, sigma_w2 / width(l-1)).
  Eigen::MatrixXd weights(int l) const;
  // Biases of layer l: N(0, sigma_b2); exactly zero when sigma_b2 = 0.
  Eigen::VectorXd bias(int l) const;

  // Residual scale of layer l (1 for plain affine layers).
  double branch_scale(int l) const;
  bool is_residual(int l) const;

 private:
  ArchSpec arch_;
  InitHyper hyper_;
  std::uint64_t seed_;
  std::uint64_t realization_;
};

Network sample_network(const ArchSpec& arch, const InitHyper& hyper, std::uint64_t seed,
                       std::uint64_t realization = 0);

// Pre-activations of every layer for inputs given as columns (dim x P).
// Entry 0 is the input itself. Propagation stops at the first layer with a
// non-finite value; `diverged_at` records it (-1 when none).
struct ForwardPass {
  std::vector<Eigen::MatrixXd> h;
  int diverged_at = -1;
};

ForwardPass forward(const Network& net, const Eigen::MatrixXd& inputs_by_column);

// Per-layer estimators of one realization.
struct LayerFragment {
  std::vector<double> lambda;  // per sample: mean_i h_i(a)^2
  std::vector<double> q;       // per pair: mean_i h_i(a) h_i(b)
  std::vector<double> c;       // per pair: q / sqrt(lambda_a lambda_b)
  double sd2 = 0.0;            // mean over neurons of the per-neuron data variance
  double sc2 = 0.0;            // mean over neurons of the squared per-neuron data mean
};

using SamplePair = std::pair<int, int>;

// Up to `count` distinct pairs a < b drawn without replacement (all pairs when
// count exceeds P(P-1)/2); deterministic per seed.
std::vector<SamplePair> sample_pairs(int n_samples, int count, std::uint64_t seed);

std::vector<LayerFragment> forward_stats(const ForwardPass& pass,
                                         const std::vector<SamplePair>& pairs);

struct G0Result {
  double g0 = 0.0;                 // binary: fraction with output 0 > output 1
  std::vector<double> class_freq;  // argmax frequencies (ties to the lower index)
  double max_class_freq = 0.0;
};

G0Result measure_g0(const Eigen::MatrixXd& outputs_by_column);

// Mean-square gradients of the softmax cross-entropy loss with respect to the
// pre-activations of every layer (sum over neurons), per sample.
struct GradientPass {
  std::vector<std::vector<double>> sq;  // [layer][sample]
  std::vector<double> cross;            // [layer] median over pairs of sum_i d_i(a) d_i(b)
  int favored = 0;                      // argmax of the batch-mean softmax
};

GradientPass backward_gradients(const Network& net, const ForwardPass& pass,
                                const std::vector<int>& labels,
                                const std::vector<SamplePair>& pairs);

// Uniformly random labels in [0, classes), deterministic per seed.
std::vector<int> random_labels(int n, int classes, std::uint64_t seed);

struct LayerBands {
  int layer = 0;
  int realizations = 0;  // realizations still finite at this layer
  Band lambda, q, c, sd2, sc2, gamma;
};

struct GradLayer {
  int layer = 0;
  double all = 0.0;        // median (over realizations) of per-realization medians
  double favored = 0.0;    // NaN when absent
  double unfavored = 0.0;  // NaN when absent
  double cross = 0.0;      // off-diagonal pairs
  double normalized = 0.0; // `all` divided by its value at the output layer
};

struct EnsembleMeasurement {
  std::vector<LayerBands> layers;      // 0..depth (forward measures)
  std::vector<double> g0_samples;      // one per realization
  std::vector<double> max_class_freq;  // one per realization
  std::vector<GradLayer> grads;        // 0..depth (gradient measures)
  int diverged_at_layer = -1;          // first layer at which any realization overflowed
};

// Runs the ensemble. `data` (rows = samples) overrides the synthetic Gaussian
// dataset; its column count must equal arch.input_dim.
EnsembleMeasurement run_ensemble(const EnsembleConfig& cfg,
                                 const std::optional<Eigen::MatrixXd>& data = std::nullopt);

// The law of the reference-class fraction at drift ratio gamma:
//   G0 = Phi(sqrt(gamma) delta), delta ~ N(0, 1), Phi the standard normal CDF
// (equivalently (1 + erf(sqrt(gamma / 2) delta)) / 2).
std::vector<double> sample_g0_law(double gamma, std::size_t draws, std::uint64_t seed);
double g0_law_cdf(double gamma, double g);

}  // namespace critnet
