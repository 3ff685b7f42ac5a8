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

#include "critnet/activations.hpp"
#include "critnet/quadrature.hpp"

namespace critnet {

// Gaussian moments of an activation, evaluated for pre-activations of
// variance x. For two-node activations the input nodes are independent with
// equal variance and the moments refer to one output slot.
//
// Every function uses the activation's closed-form overrides when present,
// unless `path` forces quadrature (used to cross-check the closed forms).
enum class MomentPath { Auto, QuadratureOnly };

// E[f(u)].
double act_mean(const ActivationSpec& act, double x, const QuadratureSpec& quad = {},
                MomentPath path = MomentPath::Auto);

// E[f(u)^2].
double second_moment(const ActivationSpec& act, double x, const QuadratureSpec& quad = {},
                     MomentPath path = MomentPath::Auto);

// E[|grad f(u)|^2].
double grad_sq(const ActivationSpec& act, double x, const QuadratureSpec& quad = {},
               MomentPath path = MomentPath::Auto);

// E[f Laplacian f], including the distributional contributions of kinks and
// of the pooling tie line.
double value_laplacian(const ActivationSpec& act, double x, const QuadratureSpec& quad = {},
                       MomentPath path = MomentPath::Auto);

// d E[f(u)^2] / dx = grad_sq + value_laplacian, so that the derivative of the
// variance map is sigma_w2 times this factor.
double alpha_factor(const ActivationSpec& act, double x, const QuadratureSpec& quad = {},
                    MomentPath path = MomentPath::Auto);

// E[f(u) f(u')] where every input node of u' has correlation corr with the
// matching node of u and variance x.
double cross_moment(const ActivationSpec& act, double x, Correlation corr,
                    const QuadratureSpec& quad = {}, MomentPath path = MomentPath::Auto);

// E[(f(u) - f(u'))^2] / 2 for the same pair, computed without cancellation so
// that it stays accurate as corr -> 1.
double half_sq_diff(const ActivationSpec& act, double x, Correlation corr,
                    const QuadratureSpec& quad = {}, MomentPath path = MomentPath::Auto);

}  // namespace critnet
