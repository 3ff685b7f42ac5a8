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

// Internal helpers shared by the quadrature-based modules: Gaussian-weighted
// composite Gauss-Legendre integration over [-R, R] with caller-supplied
// breakpoints. Header-only so the integrand can be inlined.

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <vector>

#include "critnet/errors.hpp"
#include "critnet/quadrature.hpp"
#include "critnet/special.hpp"

namespace critnet::detail {

[[noreturn]] inline void throw_non_finite(double x, double value) {
  std::ostringstream msg;
  msg.precision(17);
  msg << "integrand is not finite (value " << value << ") at abscissa " << x;
  throw NonFiniteIntegrand(x, msg.str());
}

// Sorted panel boundaries: -R, every breakpoint strictly inside (-R, R), R.
// Breakpoints closer than a relative 1e-13 are merged.
inline void panel_edges(std::span<const double> breaks, double radius,
                        std::vector<double>& edges) {
  edges.clear();
  edges.push_back(-radius);
  for (double b : breaks) {
    if (std::isfinite(b) && b > -radius && b < radius) edges.push_back(b);
  }
  edges.push_back(radius);
  std::sort(edges.begin() + 1, edges.end() - 1);
  std::size_t out = 1;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    const double prev = edges[out - 1];
    const double tol = 1e-13 * std::max(1.0, std::abs(prev));
    if (edges[i] - prev > tol) {
      edges[out++] = edges[i];
    } else if (i + 1 == edges.size()) {
      edges[out - 1] = edges[i];  // keep the exact right end point
    }
  }
  edges.resize(out);
}

// Integrator for E[f(z)] restricted to [-R, R] with dynamic breakpoints.
class PanelIntegrator {
 public:
  PanelIntegrator(int nodes, double radius)
      : rule_(legendre_rule(nodes)), radius_(radius) {}

  double radius() const { return radius_; }

  template <class F>
  double integrate(std::span<const double> breaks, F&& f) const {
    std::vector<double> edges;
    edges.reserve(breaks.size() + 2);
    panel_edges(breaks, radius_, edges);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
      total += integrate_panel(edges[p], edges[p + 1], f);
    }
    return total;
  }

  template <class F>
  double integrate_panel(double a, double b, F&& f) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const auto& x = rule_->nodes;
    const auto& w = rule_->weights;
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = mid + half * x[i];
      const double v = f(z);
      if (!std::isfinite(v)) throw_non_finite(z, v);
      sum += w[i] * normal_pdf(z) * v;
    }
    return half * sum;
  }

 private:
  std::shared_ptr<const GaussianRule> rule_;
  double radius_;
};

// Evaluates sum_i w_i f(z_i) over a precomputed Gaussian rule.
template <class F>
double apply_rule(const GaussianRule& rule, F&& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v)) throw_non_finite(rule.nodes[i], v);
    sum += rule.weights[i] * v;
  }
  return sum;
}

}  // namespace critnet::detail
