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

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "critnet/parallel.hpp"
#include "critnet/rng.hpp"
#include "critnet/stats.hpp"

namespace critnet {
namespace {

TEST(Rng, StreamsAreKeyedAndReproducible) {
  RandomStream a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    EXPECT_EQ(x, b.normal());
    EXPECT_NE(x, c.normal());
  }
  EXPECT_NE(stream_key(0, 1, 0), stream_key(0, 0, 1));
}

TEST(Rng, NormalMomentsAndUniformRange) {
  RandomStream s(42, 0);
  std::vector<double> v(200000);
  s.fill_normal(v);
  double m = 0, m2 = 0, m4 = 0;
  for (double x : v) {
    m += x;
    m2 += x * x;
    m4 += x * x * x * x;
  }
  const double n = static_cast<double>(v.size());
  EXPECT_NEAR(m / n, 0.0, 0.01);
  EXPECT_NEAR(m2 / n, 1.0, 0.01);
  EXPECT_NEAR(m4 / n, 3.0, 0.06);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(s.below(7), 7u);
  }
}

TEST(Stats, QuantilesUseLinearInterpolation) {
  const std::vector<double> d{4, 1, 3, 2, 5};
  EXPECT_DOUBLE_EQ(median(d), 3.0);
  EXPECT_DOUBLE_EQ(quantile(d, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile(d, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile(d, 0.05), 1.2);
  const auto b = band(d);
  EXPECT_DOUBLE_EQ(b.hi, 4.8);
  EXPECT_TRUE(std::isnan(band(std::vector<double>{}).mid));
}

TEST(Stats, LinearFitOfExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = linear_fit(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-15);
  EXPECT_NEAR(f.intercept, 1.0, 1e-15);
  EXPECT_NEAR(f.r2, 1.0, 1e-15);
}

TEST(Stats, KolmogorovSmirnov) {
  const std::vector<double> s{0.1, 0.3, 0.5, 0.7, 0.9};
  EXPECT_NEAR(ks_statistic(s, [](double x) { return x; }), 0.1, 1e-15);
  const std::vector<double> shifted{0.6, 0.7, 0.8, 0.9};
  EXPECT_NEAR(ks_statistic(shifted, [](double x) { return x; }), 0.6, 1e-15);
  // Large-sample critical value: sqrt(n) d = 1.358 gives p = 0.05.
  EXPECT_NEAR(ks_pvalue(1.358 / std::sqrt(1e6), 1000000), 0.05, 1e-3);
  EXPECT_EQ(ks_pvalue(0.0, 100), 1.0);
  EXPECT_LT(ks_pvalue(0.5, 100), 1e-10);
}

TEST(Stats, ChiSquareUniformity) {
  EXPECT_NEAR(chi2_uniform_pvalue(std::vector<double>{10, 10, 10, 10}), 1.0, 1e-12);
  EXPECT_LT(chi2_uniform_pvalue(std::vector<double>{100, 0, 0, 0}), 1e-10);
}

TEST(Parallel, CoversEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
  for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(100, 3,
                            [](std::size_t i) {
                              if (i == 57) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Parallel, EnvironmentFallback) {
  ::setenv("CRITNET_THREADS", "3", 1);
  EXPECT_EQ(resolve_threads(0), 3);
  EXPECT_EQ(resolve_threads(5), 5);
  ::setenv("CRITNET_THREADS", "garbage", 1);
  EXPECT_GE(resolve_threads(0), 1);
  ::unsetenv("CRITNET_THREADS");
}

}  // namespace
}  // namespace critnet
