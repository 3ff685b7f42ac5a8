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

// Internal helper: the quadrature spec for integrands f(r z) of an activation.

#include <vector>

#include "critnet/activations.hpp"
#include "critnet/quadrature.hpp"

namespace critnet::detail {

// Kinks and knees of `act`, mapped to the standard-normal variable of
// f(root * z).
inline QuadratureSpec scaled_quad(const QuadratureSpec& quad, const ActivationSpec& act,
                                  double root) {
  std::vector<double> kinks;
  std::vector<double> knees;
  for (double v : act.kinks) kinks.push_back(v / root);
  for (double v : act.knees) knees.push_back(v / root);
  return quad.with_kinks(std::move(kinks)).with_smooth_points(std::move(knees));
}

}  // namespace critnet::detail
