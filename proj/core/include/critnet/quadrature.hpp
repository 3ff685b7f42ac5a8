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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace critnet {

enum class QuadBackend { Hermite, TruncatedPanels };

std::string to_string(QuadBackend backend);
QuadBackend quad_backend_from_string(const std::string& name);

// Largest accepted node count (per panel, or of the Hermite rule).
inline constexpr int kMaxQuadNodes = 2048;

// Describes how Gaussian expectations are discretised.
//
// Truncated panels: the interval [-R, R] (R in standard deviations) is split
// at every kink point and each piece is integrated with a Gauss-Legendre rule
// of `node_count` nodes against the Gaussian density. Smooth points split the
// panels in the same way but mark steep smooth transitions rather than kinks,
// so two-dimensional rules do not refine around them. Hermite: a single
// probabilists' Gauss-Hermite rule; kink and smooth points are ignored.
struct QuadratureSpec {
  QuadBackend backend = QuadBackend::TruncatedPanels;
  int node_count = 64;
  double truncation_radius = 10.0;
  std::vector<double> kink_points;
  std::vector<double> smooth_points;

  static QuadratureSpec panels(int nodes = 64, double radius = 10.0);
  static QuadratureSpec hermite(int nodes = 128);

  // Copy with a different kink set (sorted and de-duplicated on the way in).
  QuadratureSpec with_kinks(std::vector<double> kinks) const;
  // Copy with a different smooth-point set (sorted and de-duplicated).
  QuadratureSpec with_smooth_points(std::vector<double> points) const;
  // Kink and smooth points together, sorted.
  std::vector<double> split_points() const;

  // Throws DomainError when an invariant is broken.
  void validate() const;
};

// A one-dimensional rule: sum_i weights[i] * f(nodes[i]) ~ E[f(z)], z ~ N(0,1).
struct GaussianRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Cached, immutable rule for a spec (thread-safe).
std::shared_ptr<const GaussianRule> gaussian_rule(const QuadratureSpec& spec);

// Gauss-Legendre nodes and weights on [-1, 1] (cached, thread-safe).
std::shared_ptr<const GaussianRule> legendre_rule(int n);

// Correlation of a standard bivariate pair, carried together with
// s = sqrt(1 - c^2) so that s stays accurate when c is extremely close to 1.
struct Correlation {
  double c = 0.0;
  double s = 1.0;

  static Correlation from_c(double c);
  // Build from 1 - c, which can be known far more precisely than c itself.
  static Correlation from_one_minus_c(double one_minus_c);
};

// E[f(z)] for z ~ N(0, 1).
double expect_g1(const std::function<double(double)>& f, const QuadratureSpec& spec);

// E[f(z, c z + sqrt(1 - c^2) z')] for independent standard normals z, z'.
// Kink points are interpreted as kinks of f in either argument.
double expect_g2(const std::function<double(double, double)>& f, double c,
                 const QuadratureSpec& spec);
double expect_g2(const std::function<double(double, double)>& f, Correlation corr,
                 const QuadratureSpec& spec);

// Tensor-product expectation over n independent standard normals (n <= 2).
// With `tie_line` set, the diagonal z1 = z2 is treated as a kink manifold and
// the inner integration is split along it.
double expect_gn(const std::function<double(std::span<const double>)>& f, int n,
                 const QuadratureSpec& spec, bool tie_line = false);

}  // namespace critnet
