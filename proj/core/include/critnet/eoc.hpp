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

#include <string>
#include <vector>

#include "critnet/activations.hpp"
#include "critnet/propagation.hpp"
#include "critnet/quadrature.hpp"

namespace critnet {

// A point of the edge of chaos in the (sigma_b2, sigma_w2) plane.
struct EocPoint {
  double sigma_b2 = 0.0;
  double sigma_w2 = 0.0;
  double q_star = 0.0;
  double res_var = 0.0;  // |F(q*) - q*| of the variance map
  double res_chi = 0.0;  // |chi - 1| of the criticality condition
  std::string note;
};

struct EocCurve {
  std::vector<EocPoint> points;  // ordered by q
  std::size_t rejected = 0;      // grid values that failed admissibility or verification
  // Set when no grid value produced a point (expected for ReLU-type
  // activations, whose edge of chaos is a single point at sigma_b2 = 0).
  bool empty = false;
  std::string diagnostic;
};

// Default grid: 200 logarithmically spaced values in [1e-4, 20].
std::vector<double> default_q_grid(int points = 200, double q_min = 1e-4, double q_max = 20.0);

// For each q: sigma_w2 = 1 / E[|grad f|^2] (chi = 1), then
// sigma_b2 = q - sigma_w2 E[f^2]. A point is emitted when sigma_b2 >= 0 and the
// variance map at that point provably returns to q (attracting fixed point).
EocCurve eoc_curve(const ActivationSpec& act, const std::vector<double>& q_grid,
                   const QuadratureSpec& quad = {});

// The single edge-of-chaos point of ReLU, ReLU+maxpool and ReLU+avgpool: the
// sigma_w2 at which the variance map has unit slope, with sigma_b2 = 0.
// Throws Unsupported for other activations.
EocPoint eoc_relu_family(const ActivationSpec& act);

struct EocCheck {
  bool on_eoc = false;
  double res_var = 0.0;
  double res_chi = 0.0;
  FixedPointResult fixed_point;
};

// True iff the variance converges and |chi1(q*) - 1| < tol.
EocCheck is_on_eoc(const ActivationSpec& act, const InitHyper& h, double tol,
                   const QuadratureSpec& quad = {});

}  // namespace critnet
