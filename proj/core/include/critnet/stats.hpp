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

#include <functional>
#include <span>
#include <vector>

namespace critnet {

// Linear-interpolation quantile (the "type 7" rule) of unsorted data; p in [0, 1].
double quantile(std::span<const double> data, double p);
double median(std::span<const double> data);

struct Band {
  double lo = 0.0;   // 5% quantile
  double mid = 0.0;  // median
  double hi = 0.0;   // 95% quantile
};

// 5% / 50% / 95% summary; NaN entries when data is empty.
Band band(std::span<const double> data);

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

// Asymptotic p-value of a KS statistic d at sample size n.
double ks_pvalue(double d, std::size_t n);

// Pearson chi-square test of equal cell probabilities; returns the p-value.
double chi2_uniform_pvalue(std::span<const double> counts);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Ordinary least squares y = slope x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace critnet
