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

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "critnet/quadrature.hpp"

namespace critnet {

enum class Symmetry { Odd, Even, None };
enum class PoolKind { MaxPool2, AveragePool2 };

std::string to_string(Symmetry symmetry);
std::string to_string(PoolKind pool);

// Closed-form Gaussian moments of an activation f evaluated at u = sqrt(x) z.
// Every member is optional; absent members fall back to quadrature. For
// two-node activations the moments refer to a single output slot.
struct MomentOverrides {
  std::function<double(double x)> mean;            // E[f]
  std::function<double(double x)> second_moment;   // E[f^2]
  std::function<double(double x)> grad_sq;         // E[|grad f|^2]
  std::function<double(double x)> value_laplacian; // E[f * Laplacian f], distributional parts included
  // E[f(u) f(u')] for a pair with variance x and correlation corr.
  std::function<double(double x, Correlation corr)> cross;
  // E[(f(u) - f(u'))^2] / 2, evaluated without cancellation as corr -> 1.
  std::function<double(double x, Correlation corr)> half_sq_diff;
};

using Pair = std::array<double, 2>;

// A one-node nonlinearity or a two-node pooling composite.
//
// One-node activations populate value/derivative (and optionally
// second_derivative for smooth functions). Two-node activations populate
// value2 (both output slots) and grad2 (gradient of one output slot with
// respect to both inputs); they also keep the base activation and pool kind.
struct ActivationSpec {
  std::string name;
  int arity = 1;

  std::function<double(double)> value;
  std::function<double(double)> derivative;          // one-sided (right-open) at kinks
  std::function<double(double)> second_derivative;   // only for smooth activations

  std::function<Pair(double, double)> value2;
  std::function<Pair(double, double)> grad2;

  std::vector<double> kinks;
  // Centres of steep but smooth transitions (tanh at 0). Quadrature splits
  // its panels there as it does at kinks, which keeps Gauss-Legendre
  // convergence fast when the input variance is large.
  std::vector<double> knees;
  bool bounded = false;
  double bound = 0.0;
  Symmetry symmetry = Symmetry::None;
  bool nondecreasing = false;
  std::optional<MomentOverrides> overrides;

  std::shared_ptr<const ActivationSpec> base;
  std::optional<PoolKind> pool;

  // Evaluates the first output slot for an arity-2 activation.
  double slot(double x1, double x2) const { return value2(x1, x2)[0]; }

  // Kinks and knees, sorted: the points at which quadrature panels split.
  std::vector<double> split_points() const;
};

using ActivationPtr = std::shared_ptr<const ActivationSpec>;

// Catalogue: linear, relu, tanh.
ActivationSpec builtin(const std::string& name);

// Pooling composite with window 2 of a one-node activation.
ActivationSpec compose_pool(const ActivationSpec& base, PoolKind pool);

// Resolves CLI vocabulary: linear, relu, tanh, relu+maxpool, relu+avgpool,
// tanh+maxpool, tanh+avgpool.
ActivationPtr activation_by_name(const std::string& name);

// Names accepted by activation_by_name.
const std::vector<std::string>& activation_names();

enum class VIntegrand { ValueSq, GradSq, ValueLaplacian };

// V[g](x) = E[g(sqrt(x) z)] for g in {f^2, |grad f|^2, f * Laplacian f}.
// Uses closed-form overrides when the activation provides them; otherwise
// quadrature (the Laplacian term is evaluated through Gaussian integration by
// parts so that kinks never produce delta functions).
double v_operator(const ActivationSpec& act, VIntegrand g, double x,
                  const QuadratureSpec& quad = {});

// Same, forcing the quadrature path even if overrides exist.
double v_operator_quadrature(const ActivationSpec& act, VIntegrand g, double x,
                             const QuadratureSpec& quad = {});

}  // namespace critnet
