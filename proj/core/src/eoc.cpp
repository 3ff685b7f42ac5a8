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

#include "critnet/eoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "critnet/errors.hpp"
#include "critnet/moments.hpp"

namespace critnet {

std::vector<double> default_q_grid(int points, double q_min, double q_max) {
  if (points < 1) throw DomainError("default_q_grid: points must be >= 1");
  if (!(q_min > 0.0) || !(q_max >= q_min)) throw DomainError("default_q_grid: need 0 < q_min <= q_max");
  std::vector<double> grid(static_cast<std::size_t>(points));
  if (points == 1) {
    grid[0] = q_min;
    return grid;
  }
  const double a = std::log(q_min);
  const double b = std::log(q_max);
  for (int i = 0; i < points; ++i)
    grid[i] = std::exp((a * (points - 1 - i) + b * i) / (points - 1));
  grid.back() = q_max;
  return grid;
}

namespace {

// Checks that q is an attracting fixed point of the variance map: slope below
// one, the map pushes towards q from both sides, and a damped iteration
// started at q/2 and 2q returns to q.
bool verify_attracting(const ActivationSpec& act, const InitHyper& h, double q,
                       const QuadratureSpec& quad) {
  auto F = [&](double x) { return variance_map(act, h, x, quad); };
  const double a = alpha(act, h, q, quad);
  if (!(a < 1.0)) return false;
  for (int k = 1; k <= 4; ++k) {
    const double below = q * (1.0 - std::ldexp(1.0, -k));
    const double above = q * (1.0 + std::ldexp(1.0, 1 - k));
    if (!(F(below) - below > 0.0)) return false;
    if (!(F(above) - above < 0.0)) return false;
  }
  // With the slope at q close to 1 plain iteration creeps; relax with the
  // inverse gap 1 / (1 - alpha), which removes the linear contraction.
  const double omega = std::clamp(1.0 / (1.0 - a), 1.0, 1e8);
  for (double start : {0.5 * q, 2.0 * q}) {
    double x = start;
    for (int it = 0; it < 200; ++it) {
      double next = x + omega * (F(x) - x);
      if (!(next > 0.0)) next = 0.5 * x;
      x = std::min(next, 4.0 * q);
    }
    if (!(std::abs(x - q) <= 1e-8 * std::max(1.0, q))) return false;
  }
  return true;
}

}  // namespace

EocCurve eoc_curve(const ActivationSpec& act, const std::vector<double>& q_grid,
                   const QuadratureSpec& quad) {
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    if (!(q_grid[i] > 0.0) || !std::isfinite(q_grid[i]))
      throw DomainError("eoc_curve: grid values must be finite and > 0");
    if (i > 0 && !(q_grid[i] > q_grid[i - 1]))
      throw DomainError("eoc_curve: grid must be strictly increasing");
  }
  EocCurve curve;
  for (double q : q_grid) {
    const double g = grad_sq(act, q, quad);
    if (!(g > 0.0)) {
      ++curve.rejected;
      continue;
    }
    double sw = 1.0 / g;
    // One Newton step on chi(sw) - 1 = sw g - 1 absorbs rounding of 1/g.
    sw -= (sw * g - 1.0) / g;
    const double sb = q - sw * second_moment(act, q, quad);
    if (!(sb >= 0.0)) {
      ++curve.rejected;
      continue;
    }
    const InitHyper h{sw, sb};
    EocPoint p;
    p.sigma_w2 = sw;
    p.sigma_b2 = sb;
    p.q_star = q;
    p.res_var = std::abs(variance_map(act, h, q, quad) - q);
    p.res_chi = std::abs(chi_tilde(act, h, q, quad) - 1.0);
    if (!verify_attracting(act, h, q, quad)) {
      ++curve.rejected;
      continue;
    }
    curve.points.push_back(p);
  }
  if (curve.points.empty()) {
    curve.empty = true;
    curve.diagnostic =
        "empty curve: no grid value gives sigma_b2 >= 0 with an attracting variance fixed point";
  }
  return curve;
}

EocPoint eoc_relu_family(const ActivationSpec& act) {
  const bool relu = act.arity == 1 && act.name == "relu";
  const bool pooled = act.arity == 2 && act.base && act.base->name == "relu";
  if (!relu && !pooled) throw Unsupported("eoc_relu_family: activation must be relu, relu+maxpool or relu+avgpool");
  // Positively homogeneous activations have E[f^2](x) = k x, so the variance
  // map has constant slope sw2 k; the edge of chaos is the unit-slope point.
  const double k = alpha_factor(act, 1.0);
  EocPoint p;
  p.sigma_w2 = 1.0 / k;
  p.sigma_b2 = 0.0;
  p.q_star = 1.0;
  const InitHyper h{p.sigma_w2, 0.0};
  p.res_var = std::abs(variance_map(act, h, 1.0) - 1.0);
  p.res_chi = std::abs(alpha(act, h, 1.0) - 1.0);
  p.note = "singleton: the edge of chaos of this activation is a single point";
  return p;
}

EocCheck is_on_eoc(const ActivationSpec& act, const InitHyper& h, double tol,
                   const QuadratureSpec& quad) {
  if (!(tol > 0.0)) throw DomainError("is_on_eoc: tolerance must be > 0");
  EocCheck check;
  check.fixed_point = fixed_point_variance(act, h, quad);
  if (check.fixed_point.fate != VarianceFate::Converges) {
    check.res_var = std::numeric_limits<double>::infinity();
    check.res_chi = std::numeric_limits<double>::infinity();
    return check;
  }
  const double q = check.fixed_point.q_star;
  const double next = variance_map(act, h, q, quad);
  check.res_var = std::abs(next - q);
  check.res_chi = std::abs(chi1(act, h, q, next, quad) - 1.0);
  check.on_eoc = check.res_chi < tol;
  return check;
}

}  // namespace critnet
