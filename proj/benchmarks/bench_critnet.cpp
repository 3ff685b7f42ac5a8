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

#include <benchmark/benchmark.h>

#include "critnet/ensemble.hpp"
#include "critnet/eoc.hpp"
#include "critnet/moments.hpp"
#include "critnet/propagation.hpp"
#include "critnet/quadrature.hpp"
#include "critnet/relu_analytic.hpp"

namespace {

using namespace critnet;

void BM_Expect1D(benchmark::State& state) {
  const auto spec = QuadratureSpec::panels(static_cast<int>(state.range(0))).with_kinks({0.0});
  for (auto _ : state)
    benchmark::DoNotOptimize(expect_g1([](double z) { return z > 0 ? z * z : 0.0; }, spec));
}
BENCHMARK(BM_Expect1D)->Arg(32)->Arg(64)->Arg(128);

void BM_Expect2D(benchmark::State& state) {
  const auto spec = QuadratureSpec::panels(static_cast<int>(state.range(0))).with_smooth_points({0.0});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        expect_g2([](double a, double b) { return std::tanh(2 * a) * std::tanh(2 * b); }, 0.7, spec));
}
BENCHMARK(BM_Expect2D)->Arg(32)->Arg(64);

void BM_StepMF(benchmark::State& state, const char* name) {
  const auto act = activation_by_name(name);
  const auto s = LayerStats::from_lambda_q(0, 1.3, 0.6);
  for (auto _ : state) benchmark::DoNotOptimize(step_mf(*act, {2.0, 0.1}, s));
}
BENCHMARK_CAPTURE(BM_StepMF, relu, "relu");
BENCHMARK_CAPTURE(BM_StepMF, tanh, "tanh");
BENCHMARK_CAPTURE(BM_StepMF, tanh_maxpool, "tanh+maxpool");

void BM_StepIGB(benchmark::State& state, const char* name) {
  const auto act = activation_by_name(name);
  for (auto _ : state) benchmark::DoNotOptimize(step_igb(*act, {2.0, 0.1}, 0.7, 0.6));
}
BENCHMARK_CAPTURE(BM_StepIGB, relu, "relu");
BENCHMARK_CAPTURE(BM_StepIGB, tanh, "tanh");
BENCHMARK_CAPTURE(BM_StepIGB, relu_maxpool, "relu+maxpool")->Unit(benchmark::kMillisecond);

void BM_ReluClosedFormStep(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(step_relu({2.0, 0.1}, 0.7, 0.6));
}
BENCHMARK(BM_ReluClosedFormStep);

void BM_DepthTrace(benchmark::State& state) {
  const auto act = activation_by_name("tanh");
  for (auto _ : state) benchmark::DoNotOptimize(depth_trace(*act, {3.0, 0.1}, 100));
}
BENCHMARK(BM_DepthTrace)->Unit(benchmark::kMillisecond);

void BM_ClassifyPhase(benchmark::State& state) {
  const auto act = activation_by_name("tanh");
  for (auto _ : state) benchmark::DoNotOptimize(classify_phase(*act, {2.5, 0.2}));
}
BENCHMARK(BM_ClassifyPhase)->Unit(benchmark::kMillisecond);

void BM_EocCurve(benchmark::State& state) {
  const auto act = activation_by_name("tanh");
  const auto grid = default_q_grid(50);
  for (auto _ : state) benchmark::DoNotOptimize(eoc_curve(*act, grid));
}
BENCHMARK(BM_EocCurve)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  ArchSpec arch;
  arch.depth = 10;
  arch.width = static_cast<int>(state.range(0));
  arch.input_dim = arch.width;
  arch.activation = activation_by_name("relu");
  const Network net(arch, {2.0, 0.1}, 0, 0);
  const Eigen::MatrixXd x = make_dataset(100, arch.width, 1).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(forward(net, x));
}
BENCHMARK(BM_Forward)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Ensemble(benchmark::State& state) {
  EnsembleConfig cfg;
  cfg.arch.depth = 10;
  cfg.arch.width = 500;
  cfg.arch.input_dim = 500;
  cfg.arch.activation = activation_by_name("tanh");
  cfg.hyper = {2.0, 0.1};
  cfg.n_samples = 50;
  cfg.n_realizations = 4;
  cfg.measure_grads = true;
  cfg.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_ensemble(cfg));
}
BENCHMARK(BM_Ensemble)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
