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
#include <numbers>

#include <gtest/gtest.h>

#include "critnet/propagation.hpp"
#include "critnet/relu_analytic.hpp"

namespace critnet {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ReluAnalytic, DriftFunctionsAtZero) {
  EXPECT_NEAR(g_fn(0.0), 1.0 / kPi, 1e-16);
  EXPECT_NEAR(f_fn(0.0), 1.0 - 1.0 / kPi, 1e-16);
  // f + g = 1 + G by construction.
  for (double G : {0.1, 3.0, 1e6}) EXPECT_NEAR((f_fn(G) + g_fn(G)) / (1 + G), 1.0, 1e-14);
}

TEST(ReluAnalytic, DataFunctionFromOneMinusC) {
  for (double c : {0.1, 0.5, 0.9}) {
    EXPECT_NEAR(f_fn_from_one_minus_c(1 - c), f_fn(c / (1 - c)), 1e-12);
  }
  // For large G the data function approaches 1 - 4 / (3 pi sqrt(2 G)).
  const double v = f_fn_from_one_minus_c(1e-18);
  EXPECT_LT(v, 1.0);
  EXPECT_NEAR((1.0 - v) / (4.0 / (3 * kPi * std::sqrt(2e18))), 1.0, 1e-5);
}

TEST(ReluAnalytic, StepMatchesQuadratureRecursion) {
  const auto relu = activation_by_name("relu");
  for (const InitHyper h : {InitHyper{1.5, 0.0}, InitHyper{2.0, 0.1}, InitHyper{2.5, 0.5}}) {
    for (double sd2 : {0.3, 1.0}) {
      for (double sc2 : {0.0, 0.7, 5.0}) {
        const auto exact = step_relu(h, sd2, sc2);
        const auto quad = step_igb(*relu, h, sd2, sc2);
        EXPECT_NEAR(exact.sd2, quad.sd2, 1e-12);
        EXPECT_NEAR(exact.sc2, quad.sc2, 1e-12);
      }
    }
  }
}

TEST(ReluAnalytic, GammaStepIsConsistentWithStep) {
  const InitHyper h{2.2, 0.3};
  const double sd2 = 0.8, sc2 = 1.1;
  const auto n = step_relu(h, sd2, sc2);
  EXPECT_NEAR(gamma_step(h, sc2 / sd2, n.sd2 + n.sc2), n.sc2 / n.sd2, 1e-12);
}

TEST(ReluAnalytic, BiasFreeDriftMap) {
  EXPECT_NEAR(gamma_step({2.0, 0.0}, 0.0, 1.0), 1.0 / (kPi - 1.0), 1e-15);
  // Without bias the drift map does not depend on sigma_w2.
  EXPECT_EQ(gamma_step({1.3, 0.0}, 4.0, 1.0), gamma_step({3.1, 0.0}, 4.0, 7.0));
  const double G = 1e6;
  // Sub-leading growth: the increment approaches (2 sqrt(2) / (3 pi)) sqrt(G).
  EXPECT_NEAR((gamma_step({2.0, 0.0}, G, 1.0) - G) / (2 * std::sqrt(2.0) / (3 * kPi) * std::sqrt(G)), 1.0, 1e-3);
  for (double g : {0.0, 0.5, 10.0, 1e4}) EXPECT_GT(gamma_step({1.7, 0.2}, g, 2.0), g);
}

TEST(ReluAnalytic, TraceIteratesStep) {
  const InitHyper h{2.5, 0.1};
  const auto tr = relu_gamma_trace(h, 30);
  ASSERT_EQ(tr.size(), 31u);
  IgbState s{1.0, 0.0};
  for (int l = 1; l <= 30; ++l) {
    s = step_relu(h, s.sd2, s.sc2);
    EXPECT_NEAR(tr[l].sd2 / s.sd2, 1.0, 1e-12);
    EXPECT_NEAR(tr[l].c, s.sc2 / (s.sd2 + s.sc2), 1e-12);
  }
}

TEST(ReluAnalytic, CriticalVarianceGrowsLinearlyWithBias) {
  const auto tr = relu_gamma_trace({2.0, 0.1}, 50);
  EXPECT_NEAR(tr[50].sd2 + tr[50].sc2, 1.0 + 0.1 * 50, 1e-10);
}

TEST(ReluAnalytic, AsymptoticRegimes) {
  auto r = asymptotic_class({1.5, 0.1});
  EXPECT_EQ(r.gamma_rate, GammaRate::Exponential);
  EXPECT_EQ(r.total_var, TotalVarFate::ConvergesPositive);
  EXPECT_EQ(r.centers, CentersFate::Finite);
  r = asymptotic_class({1.5, 0.0});
  EXPECT_EQ(r.total_var, TotalVarFate::ConvergesToZero);
  EXPECT_EQ(r.gamma_rate, GammaRate::Quadratic);
  r = asymptotic_class({2.0, 0.0});
  EXPECT_EQ(r.total_var, TotalVarFate::Constant);
  EXPECT_EQ(r.data_var, DataVarFate::ToZero);
  r = asymptotic_class({2.0, 0.1});
  EXPECT_EQ(r.total_var, TotalVarFate::DivergesLinearly);
  r = asymptotic_class({3.0, 0.0});
  EXPECT_EQ(r.total_var, TotalVarFate::DivergesExponentially);
  EXPECT_EQ(r.data_var, DataVarFate::Diverges);
}

TEST(ReluAnalytic, SaturatedDriftIsCapped) {
  const auto tr = relu_gamma_trace({1.5, 0.5}, 400);
  EXPECT_TRUE(tr.back().saturated);
  EXPECT_EQ(tr.back().gamma, kGammaSaturation);
  EXPECT_GT(tr.back().one_minus_c, 0.0);
}

}  // namespace
}  // namespace critnet
