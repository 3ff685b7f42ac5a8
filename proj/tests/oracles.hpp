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

// Independent reference integrators used as test oracles. They share no code
// with the library: plain trapezoid sums on a fine uniform grid, which are
// spectrally accurate for smooth integrands against the Gaussian weight.

#include <cmath>
#include <functional>
#include <numbers>

namespace critnet::testing {

inline double gauss_density(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// E[f(z)], z ~ N(0, 1).
inline double trapezoid_g1(const std::function<double(double)>& f, double h = 1e-3,
                           double radius = 12.0) {
  const int n = static_cast<int>(std::lround(2.0 * radius / h));
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double z = -radius + h * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    sum += w * f(z) * gauss_density(z);
  }
  return sum * h;
}

// E[f(z1, z2)] over independent standard normals.
inline double trapezoid_g2(const std::function<double(double, double)>& f, double h = 0.01,
                           double radius = 9.0) {
  const int n = static_cast<int>(std::lround(2.0 * radius / h));
  double sum = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double a = -radius + h * i;
    const double wa = ((i == 0 || i == n) ? 0.5 : 1.0) * gauss_density(a);
    for (int j = 0; j <= n; ++j) {
      const double b = -radius + h * j;
      const double wb = ((j == 0 || j == n) ? 0.5 : 1.0) * gauss_density(b);
      sum += wa * wb * f(a, b);
    }
  }
  return sum * h * h;
}

// Arc-cosine kernel: E[relu(u) relu(u')] for a pair of variance x and
// correlation c.
inline double relu_cross(double x, double c) {
  const double s = std::sqrt(1.0 - c * c);
  return x / (2.0 * std::numbers::pi) * (s + (std::numbers::pi - std::acos(c)) * c);
}

}  // namespace critnet::testing
