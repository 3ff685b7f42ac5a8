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

#include <cmath>
#include <numbers>

namespace critnet {

// Standard normal density.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

// Standard normal cumulative distribution, accurate in both tails.
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * (0.5 * std::numbers::sqrt2));
}

// Inverse of normal_cdf on (0, 1); returns -inf / +inf at the end points.
double normal_quantile(double p);

// P(X <= x, Y <= y) for standard normals with correlation r in [-1, 1]
// (Genz's method, absolute accuracy near 1e-15).
double bivariate_normal_cdf(double x, double y, double r);

}  // namespace critnet
