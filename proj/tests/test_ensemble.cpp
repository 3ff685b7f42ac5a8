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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "critnet/ensemble.hpp"
#include "critnet/errors.hpp"
#include "critnet/propagation.hpp"

namespace critnet {
namespace {

ArchSpec small_arch(const std::string& act, int depth = 4, int width = 64) {
  ArchSpec a;
  a.depth = depth;
  a.width = width;
  a.input_dim = width;
  a.output_dim = 2;
  a.activation = activation_by_name(act);
  return a;
}

TEST(Ensemble, ArchValidation) {
  auto a = small_arch("relu");
  EXPECT_NO_THROW(a.validate());
  a.output_dim = 1;
  EXPECT_THROW(a.validate(), DomainError);
  auto p = small_arch("relu+maxpool", 3, 63);
  EXPECT_THROW(p.validate(), DomainError);
  EXPECT_EQ(small_arch("relu", 3, 10).layer_width(3), 2);
}

TEST(Ensemble, WeightsAreReproducibleAndCorrectlyScaled) {
  const Network net(small_arch("relu", 3, 400), {2.0, 0.0}, 5, 1);
  const Eigen::MatrixXd w = net.weights(2);
  EXPECT_EQ(w, net.weights(2));
  EXPECT_EQ(w.rows(), 400);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 5 * std::sqrt(2.0 / 400 / w.size()));
  EXPECT_NEAR(var / (2.0 / 400), 1.0, 0.01);
  EXPECT_TRUE(net.bias(2).isZero(0.0));
  const Network other(small_arch("relu", 3, 400), {2.0, 0.0}, 5, 2);
  EXPECT_NE(w, other.weights(2));
  const Network biased(small_arch("relu", 3, 400), {2.0, 0.3}, 5, 1);
  EXPECT_NEAR(biased.bias(1).squaredNorm() / 400, 0.3, 0.08);
}

TEST(Ensemble, ForwardOfLinearNetworkIsAffine) {
  const Network net(small_arch("linear", 2, 8), {1.0, 0.2}, 3, 0);
  const Eigen::MatrixXd x = make_dataset(5, 8, 9).transpose();
  const auto pass = forward(net, x);
  ASSERT_EQ(pass.h.size(), 3u);
  const Eigen::MatrixXd h1 = (net.weights(1) * x).colwise() + net.bias(1);
  EXPECT_TRUE(pass.h[1].isApprox(h1, 1e-14));
  EXPECT_EQ(pass.diverged_at, -1);
}

TEST(Ensemble, ResidualLayersAddScaledBranch) {
  auto arch = small_arch("relu", 4, 8);
  arch.residual = ResidualSpec{1.0};
  const Network net(arch, {2.0, 0.0}, 3, 0);
  EXPECT_FALSE(net.is_residual(1));
  EXPECT_TRUE(net.is_residual(2));
  EXPECT_NEAR(net.branch_scale(2), 0.25, 1e-15);
  const Eigen::MatrixXd x = make_dataset(3, 8, 1).transpose();
  const auto pass = forward(net, x);
  const Eigen::MatrixXd branch = net.weights(2) * pass.h[1].cwiseMax(0.0);
  EXPECT_TRUE(pass.h[2].isApprox(pass.h[1] + 0.25 * branch, 1e-14));
}

TEST(Ensemble, PairsAreDistinctAndDeterministic) {
  const auto all = sample_pairs(5, 100, 1);
  EXPECT_EQ(all.size(), 10u);
  const auto some = sample_pairs(50, 30, 1);
  EXPECT_EQ(some, sample_pairs(50, 30, 1));
  std::set<SamplePair> uniq(some.begin(), some.end());
  EXPECT_EQ(uniq.size(), 30u);
  for (auto [a, b] : some) EXPECT_LT(a, b);
}

TEST(Ensemble, ForwardStatsOfKnownMatrix) {
  ForwardPass pass;
  Eigen::MatrixXd h(2, 2);
  h << 1.0, 1.0,
       3.0, -1.0;
  pass.h = {h};
  const auto frag = forward_stats(pass, {{0, 1}});
  ASSERT_EQ(frag.size(), 1u);
  EXPECT_DOUBLE_EQ(frag[0].lambda[0], 5.0);
  EXPECT_DOUBLE_EQ(frag[0].lambda[1], 1.0);
  EXPECT_DOUBLE_EQ(frag[0].q[0], -1.0);
  EXPECT_DOUBLE_EQ(frag[0].c[0], -1.0 / std::sqrt(5.0));
  // Per-neuron data means 1 and 1, variances 0 and 4.
  EXPECT_DOUBLE_EQ(frag[0].sd2, 2.0);
  EXPECT_DOUBLE_EQ(frag[0].sc2, 1.0);
}

TEST(Ensemble, G0CountsReferenceClassWithTiesToLowerIndex) {
  Eigen::MatrixXd out(2, 4);
  out << 1.0, 0.0, 2.0, 5.0,
         0.0, 1.0, 2.0, 1.0;
  const auto g = measure_g0(out);
  EXPECT_DOUBLE_EQ(g.g0, 0.5);
  ASSERT_EQ(g.class_freq.size(), 2u);
  EXPECT_DOUBLE_EQ(g.class_freq[0], 0.75);
  EXPECT_DOUBLE_EQ(g.max_class_freq, 0.75);
}

TEST(Ensemble, OutputGradientIsSoftmaxResidual) {
  const auto arch = small_arch("tanh", 3, 16);
  const Network net(arch, {1.5, 0.1}, 2, 0);
  const Eigen::MatrixXd x = make_dataset(6, 16, 3).transpose();
  const auto pass = forward(net, x);
  const auto labels = random_labels(6, 2, 4);
  const auto grads = backward_gradients(net, pass, labels, sample_pairs(6, 5, 1));
  for (int a = 0; a < 6; ++a) {
    const Eigen::VectorXd z = pass.h[3].col(a);
    const Eigen::VectorXd p = (z.array() - z.maxCoeff()).exp() / (z.array() - z.maxCoeff()).exp().sum();
    Eigen::VectorXd d = p;
    d[labels[a]] -= 1.0;
    EXPECT_NEAR(grads.sq[3][a], d.squaredNorm(), 1e-14);
  }
  // Chain rule one layer down: delta^{l} = phi'(h^{l}) * W^{l+1}^T delta^{l+1}.
  for (int a = 0; a < 6; ++a) {
    const Eigen::VectorXd z = pass.h[3].col(a);
    Eigen::VectorXd d = (z.array() - z.maxCoeff()).exp();
    d /= d.sum();
    d[labels[a]] -= 1.0;
    const Eigen::VectorXd back = net.weights(3).transpose() * d;
    const Eigen::VectorXd dphi = pass.h[2].col(a).unaryExpr([](double v) { return 1 - std::tanh(v) * std::tanh(v); });
    EXPECT_NEAR(grads.sq[2][a], back.cwiseProduct(dphi).squaredNorm(), 1e-13);
  }
}

TEST(Ensemble, LabelsCoverClasses) {
  const auto l = random_labels(1000, 3, 7);
  std::set<int> seen(l.begin(), l.end());
  EXPECT_EQ(seen, (std::set<int>{0, 1, 2}));
  EXPECT_EQ(l, random_labels(1000, 3, 7));
}

TEST(Ensemble, ResultsDoNotDependOnThreadCount) {
  EnsembleConfig cfg;
  cfg.arch = small_arch("tanh", 5, 32);
  cfg.hyper = {2.0, 0.1};
  cfg.n_samples = 20;
  cfg.n_realizations = 6;
  cfg.measure_g0 = true;
  cfg.measure_grads = true;
  cfg.threads = 1;
  const auto a = run_ensemble(cfg);
  cfg.threads = 4;
  const auto b = run_ensemble(cfg);
  ASSERT_EQ(a.layers.size(), b.layers.size());
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    EXPECT_EQ(a.layers[l].c.mid, b.layers[l].c.mid);
    EXPECT_EQ(a.layers[l].lambda.lo, b.layers[l].lambda.lo);
  }
  EXPECT_EQ(a.g0_samples, b.g0_samples);
  for (std::size_t l = 0; l < a.grads.size(); ++l) EXPECT_EQ(a.grads[l].all, b.grads[l].all);
}

TEST(Ensemble, WideReluEnsembleTracksTheory) {
  EnsembleConfig cfg;
  cfg.arch = small_arch("relu", 10, 500);
  cfg.hyper = {2.0, 0.1};
  cfg.n_samples = 50;
  cfg.n_realizations = 10;
  const auto m = run_ensemble(cfg);
  const auto tr = depth_trace(*cfg.arch.activation, cfg.hyper, 10);
  int inside = 0;
  for (const auto& lb : m.layers) {
    const double c = tr.layers[lb.layer].c;
    inside += (c >= lb.c.lo && c <= lb.c.hi);
    // The two-neuron output layer does not self-average; skip it for lambda.
    if (lb.layer < cfg.arch.depth) EXPECT_NEAR(lb.lambda.mid / tr.layers[lb.layer].lambda, 1.0, 0.1) << lb.layer;
  }
  EXPECT_GE(inside, 9);
}

TEST(Ensemble, G0LawAtUnitDriftIsUniform) {
  for (double g : {0.1, 0.5, 0.93}) EXPECT_NEAR(g0_law_cdf(1.0, g), g, 1e-14);
  EXPECT_EQ(g0_law_cdf(0.0, 0.4), 0.0);
  EXPECT_EQ(g0_law_cdf(0.0, 0.6), 1.0);
  const auto s = sample_g0_law(1.0, 20000, 3);
  double mean = 0.0;
  for (double v : s) mean += v;
  EXPECT_NEAR(mean / s.size(), 0.5, 0.01);
  EXPECT_EQ(s, sample_g0_law(1.0, 20000, 3));
}

class CsvFile : public ::testing::Test {
 protected:
  std::filesystem::path path_ = std::filesystem::temp_directory_path() / "critnet_test_matrix.csv";
  void write(const std::string& text) { std::ofstream(path_) << text; }
  void TearDown() override { std::filesystem::remove(path_); }
};

TEST_F(CsvFile, ReadsHeaderAndStandardises) {
  write("a,b\n1,10\n2,10.5\n3,11\n");
  const auto raw = read_csv_matrix(path_.string(), false);
  ASSERT_EQ(raw.rows(), 3);
  ASSERT_EQ(raw.cols(), 2);
  EXPECT_EQ(raw(2, 1), 11.0);
  const auto z = read_csv_matrix(path_.string(), true);
  EXPECT_NEAR(z.col(0).mean(), 0.0, 1e-15);
  EXPECT_NEAR(z.col(0).squaredNorm() / 3, 1.0, 1e-14);
}

TEST_F(CsvFile, RejectsRaggedAndNonFinite) {
  write("1,2\n3\n");
  EXPECT_THROW(read_csv_matrix(path_.string()), DomainError);
  write("1,2\n3,inf\n");
  EXPECT_THROW(read_csv_matrix(path_.string()), DomainError);
  EXPECT_THROW(read_csv_matrix("/nonexistent/critnet.csv"), DomainError);
}

}  // namespace
}  // namespace critnet
