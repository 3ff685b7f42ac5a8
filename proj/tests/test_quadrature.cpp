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

#include "critnet/errors.hpp"
#include "critnet/quadrature.hpp"
#include "critnet/special.hpp"
#include "oracles.hpp"

namespace critnet {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Quadrature, PolynomialMomentsAreExact) {
  for (const auto& spec : {QuadratureSpec::panels(), QuadratureSpec::hermite()}) {
    EXPECT_NEAR(expect_g1([](double) { return 1.0; }, spec), 1.0, 1e-14);
    EXPECT_NEAR(expect_g1([](double z) { return z; }, spec), 0.0, 1e-14);
    EXPECT_NEAR(expect_g1([](double z) { return z * z; }, spec), 1.0, 1e-13);
    EXPECT_NEAR(expect_g1([](double z) { return z * z * z * z; }, spec), 3.0, 1e-12);
    EXPECT_NEAR(expect_g1([](double z) { return std::pow(z, 6); }, spec), 15.0, 1e-11);
  }
}

TEST(Quadrature, SmoothExpectationMatchesClosedForm) {
  // E[cos(z)] = exp(-1/2).
  const double truth = std::exp(-0.5);
  EXPECT_NEAR(expect_g1([](double z) { return std::cos(z); }, QuadratureSpec::panels()), truth, 1e-14);
  EXPECT_NEAR(expect_g1([](double z) { return std::cos(z); }, QuadratureSpec::hermite()), truth, 1e-13);
}

TEST(Quadrature, KinkSplittingRecoversAbsoluteMoment) {
  const auto spec = QuadratureSpec::panels().with_kinks({0.0});
  EXPECT_NEAR(expect_g1([](double z) { return std::abs(z); }, spec), std::sqrt(2.0 / kPi), 1e-14);
  EXPECT_NEAR(expect_g1([](double z) { return z > 0 ? z * z : 0.0; }, spec), 0.5, 1e-14);
}

TEST(Quadrature, BivariateCovarianceAndOrthant) {
  const auto spec = QuadratureSpec::panels().with_kinks({0.0});
  for (double c : {-0.9, -0.3, 0.0, 0.4, 0.95}) {
    EXPECT_NEAR(expect_g2([](double a, double b) { return a * b; }, c, spec), c, 1e-13);
    const double orthant = 0.25 + std::asin(c) / (2.0 * kPi);
    EXPECT_NEAR(expect_g2([](double a, double b) { return (a > 0 && b > 0) ? 1.0 : 0.0; }, c, spec),
                orthant, 1e-10)
        << "c = " << c;
  }
}

TEST(Quadrature, BivariateReluKernel) {
  const auto spec = QuadratureSpec::panels().with_kinks({0.0});
  auto relu = [](double v) { return v > 0 ? v : 0.0; };
  for (double c : {-0.7, 0.0, 0.5, 0.99, 0.999999}) {
    const double got = expect_g2([&](double a, double b) { return relu(a) * relu(b); }, c, spec);
    EXPECT_NEAR(got, testing::relu_cross(1.0, c), 1e-12) << "c = " << c;
  }
}

TEST(Quadrature, TensorProductMatchesTrapezoidOracle) {
  // The steep direction a + b = 0 is not axis aligned, so no panel split
  // helps; a finer rule is needed for 1e-11 agreement.
  const auto spec = QuadratureSpec::panels(128);
  auto f = [](std::span<const double> z) { return std::tanh(z[0]) * std::tanh(z[0] + z[1]); };
  const double oracle =
      testing::trapezoid_g2([](double a, double b) { return std::tanh(a) * std::tanh(a + b); }, 0.02);
  EXPECT_NEAR(expect_gn(f, 2, spec), oracle, 1e-11);
}

TEST(Quadrature, TieLineHandlesMaxKink) {
  const auto spec = QuadratureSpec::panels();
  // E[max(z1, z2)^2] = 1 and E[max(z1, z2)] = 1 / sqrt(pi).
  auto m2 = [](std::span<const double> z) { const double m = std::max(z[0], z[1]); return m * m; };
  auto m1 = [](std::span<const double> z) { return std::max(z[0], z[1]); };
  EXPECT_NEAR(expect_gn(m2, 2, spec, true), 1.0, 1e-12);
  EXPECT_NEAR(expect_gn(m1, 2, spec, true), 1.0 / std::sqrt(kPi), 1e-12);
}

TEST(Quadrature, CorrelationFromOneMinusCKeepsPrecision) {
  const auto corr = Correlation::from_one_minus_c(1e-20);
  EXPECT_EQ(corr.c, 1.0);
  EXPECT_NEAR(corr.s / (std::sqrt(2.0) * 1e-10), 1.0, 1e-12);
  const auto plain = Correlation::from_c(0.6);
  EXPECT_NEAR(plain.s, 0.8, 1e-15);
}

TEST(Quadrature, SpecValidation) {
  QuadratureSpec bad;
  bad.node_count = 0;
  EXPECT_THROW(bad.validate(), DomainError);
  bad = QuadratureSpec{};
  bad.truncation_radius = -1.0;
  EXPECT_THROW(bad.validate(), DomainError);
  EXPECT_THROW(quad_backend_from_string("simpson"), DomainError);
  EXPECT_EQ(quad_backend_from_string(to_string(QuadBackend::Hermite)), QuadBackend::Hermite);
}

TEST(Quadrature, RulesAreCachedAndNormalised) {
  const auto a = gaussian_rule(QuadratureSpec::panels(64));
  const auto b = gaussian_rule(QuadratureSpec::panels(64));
  EXPECT_EQ(a.get(), b.get());
  double total = 0.0;
  for (double w : a->weights) total += w;
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(Quadrature, LargeHermiteRulesStayAccurate) {
  for (int n : {200, 500, 1000}) {
    const auto spec = QuadratureSpec::hermite(n);
    EXPECT_NEAR(expect_g1([](double) { return 1.0; }, spec), 1.0, 1e-13) << n;
    EXPECT_NEAR(expect_g1([](double z) { return z * z; }, spec), 1.0, 1e-12) << n;
    EXPECT_NEAR(expect_g1([](double z) { return std::cos(z); }, spec), std::exp(-0.5), 1e-13) << n;
  }
  QuadratureSpec huge = QuadratureSpec::hermite(kMaxQuadNodes + 1);
  EXPECT_THROW(huge.validate(), DomainError);
}

TEST(Special, NormalFunctions) {
  EXPECT_DOUBLE_EQ(normal_cdf(0.0), 0.5);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-15);
  for (double p : {1e-300, 1e-10, 0.025, 0.5, 0.8, 1 - 1e-12}) {
    EXPECT_NEAR(normal_cdf(normal_quantile(p)) / p, 1.0, 1e-12) << p;
  }
  EXPECT_EQ(normal_quantile(0.0), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(normal_quantile(1.0), std::numeric_limits<double>::infinity());
}

TEST(Special, BivariateNormalCdf) {
  for (double r : {-0.99, -0.5, 0.0, 0.3, 0.9, 1.0}) {
    EXPECT_NEAR(bivariate_normal_cdf(0.0, 0.0, r), 0.25 + std::asin(r) / (2 * kPi), 1e-14) << r;
  }
  EXPECT_NEAR(bivariate_normal_cdf(0.7, -0.2, 0.0), normal_cdf(0.7) * normal_cdf(-0.2), 1e-15);
  EXPECT_NEAR(bivariate_normal_cdf(0.4, 1.1, 1.0), normal_cdf(0.4), 1e-15);
}

}  // namespace
}  // namespace critnet
