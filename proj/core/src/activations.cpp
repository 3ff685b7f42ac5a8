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

#include "critnet/activations.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "critnet/errors.hpp"
#include "scaled_quad.hpp"
#include "critnet/relu_analytic.hpp"

namespace critnet {

namespace {

constexpr double kPi = std::numbers::pi;

// Angle between the two members of a correlated pair, accurate near c = 1.
double pair_angle(Correlation corr) { return std::atan2(corr.s, corr.c); }

// Arc-cosine kernel of degree one: E[relu(u) relu(u')] for unit variance.
double relu_cross_unit(Correlation corr) {
  return (corr.s + (kPi - pair_angle(corr)) * corr.c) / (2.0 * kPi);
}

// E[(relu(u) - relu(u'))^2] / 2 for unit variance, cancellation free for c -> 1.
double relu_half_sq_diff_unit(Correlation corr) {
  if (corr.c <= 0.0) return 0.5 - relu_cross_unit(corr);
  const double one_minus_c = corr.s * corr.s / (1.0 + corr.c);
  if (one_minus_c == 0.0) return 0.0;
  return 0.5 * one_minus_c * f_fn_from_one_minus_c(std::min(one_minus_c, 1.0));
}

MomentOverrides relu_overrides() {
  MomentOverrides m;
  m.mean = [](double x) { return std::sqrt(x) / std::sqrt(2.0 * kPi); };
  m.second_moment = [](double x) { return 0.5 * x; };
  m.grad_sq = [](double) { return 0.5; };
  m.value_laplacian = [](double) { return 0.0; };
  m.cross = [](double x, Correlation corr) { return x * relu_cross_unit(corr); };
  m.half_sq_diff = [](double x, Correlation corr) { return x * relu_half_sq_diff_unit(corr); };
  return m;
}

MomentOverrides linear_overrides() {
  MomentOverrides m;
  m.mean = [](double) { return 0.0; };
  m.second_moment = [](double x) { return x; };
  m.grad_sq = [](double) { return 1.0; };
  m.value_laplacian = [](double) { return 0.0; };
  m.cross = [](double x, Correlation corr) { return x * corr.c; };
  m.half_sq_diff = [](double x, Correlation corr) {
    return x * corr.s * corr.s / (1.0 + corr.c);
  };
  return m;
}

// Max-pooled ReLU. With M the maximum of two standard normals:
//   E[relu(M)]   = 1/sqrt(2 pi) + 1/(2 sqrt(pi))
//   E[relu(M)^2] = (3 pi + 2) / (4 pi)
//   E[|grad|^2]  = P(M > 0) = 3/4
//   E[f Lap f]   = 1 / (2 pi)      (tie-line contribution)
MomentOverrides maxpool_relu_overrides() {
  MomentOverrides m;
  m.mean = [](double x) {
    return std::sqrt(x) * (1.0 / std::sqrt(2.0 * kPi) + 0.5 / std::sqrt(kPi));
  };
  m.second_moment = [](double x) { return x * (3.0 * kPi + 2.0) / (4.0 * kPi); };
  m.grad_sq = [](double) { return 0.75; };
  m.value_laplacian = [](double) { return 1.0 / (2.0 * kPi); };
  return m;
}

// Average-pooled ReLU: f = (relu(x1) + relu(x2)) / 2.
MomentOverrides avgpool_relu_overrides() {
  MomentOverrides m;
  m.mean = [](double x) { return std::sqrt(x) / std::sqrt(2.0 * kPi); };
  m.second_moment = [](double x) { return x * (kPi + 1.0) / (4.0 * kPi); };
  m.grad_sq = [](double) { return 0.25; };
  m.value_laplacian = [](double) { return 1.0 / (4.0 * kPi); };
  m.cross = [](double x, Correlation corr) {
    return 0.5 * x * (relu_cross_unit(corr) + 1.0 / (2.0 * kPi));
  };
  m.half_sq_diff = [](double x, Correlation corr) {
    return 0.5 * x * relu_half_sq_diff_unit(corr);
  };
  return m;
}

ActivationSpec make_linear() {
  ActivationSpec a;
  a.name = "linear";
  a.value = [](double x) { return x; };
  a.derivative = [](double) { return 1.0; };
  a.second_derivative = [](double) { return 0.0; };
  a.symmetry = Symmetry::Odd;
  a.nondecreasing = true;
  a.overrides = linear_overrides();
  return a;
}

ActivationSpec make_relu() {
  ActivationSpec a;
  a.name = "relu";
  a.value = [](double x) { return x > 0.0 ? x : 0.0; };
  // Right-open convention: the derivative at 0 is 0.
  a.derivative = [](double x) { return x > 0.0 ? 1.0 : 0.0; };
  a.kinks = {0.0};
  a.symmetry = Symmetry::None;
  a.nondecreasing = true;
  a.overrides = relu_overrides();
  return a;
}

ActivationSpec make_tanh() {
  ActivationSpec a;
  a.name = "tanh";
  a.value = [](double x) { return std::tanh(x); };
  a.derivative = [](double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  };
  a.second_derivative = [](double x) {
    const double t = std::tanh(x);
    return -2.0 * t * (1.0 - t * t);
  };
  a.knees = {0.0};
  a.bounded = true;
  a.bound = 1.0;
  a.symmetry = Symmetry::Odd;
  a.nondecreasing = true;
  return a;
}

}  // namespace

std::string to_string(Symmetry symmetry) {
  switch (symmetry) {
    case Symmetry::Odd: return "odd";
    case Symmetry::Even: return "even";
    case Symmetry::None: return "none";
  }
  return "none";
}

std::string to_string(PoolKind pool) {
  return pool == PoolKind::MaxPool2 ? "maxpool" : "avgpool";
}

std::vector<double> ActivationSpec::split_points() const {
  std::vector<double> p = kinks;
  p.insert(p.end(), knees.begin(), knees.end());
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  return p;
}

ActivationSpec builtin(const std::string& name) {
  if (name == "linear") return make_linear();
  if (name == "relu") return make_relu();
  if (name == "tanh") return make_tanh();
  throw UnknownActivation(name);
}

ActivationSpec compose_pool(const ActivationSpec& base, PoolKind pool) {
  if (base.arity != 1) throw ArityError("compose_pool: base activation must have arity 1");
  auto b = std::make_shared<const ActivationSpec>(base);
  ActivationSpec a;
  a.name = base.name + "+" + to_string(pool);
  a.arity = 2;
  a.kinks = base.kinks;
  a.knees = base.knees;
  a.bounded = base.bounded;
  a.bound = base.bound;
  a.nondecreasing = base.nondecreasing;
  a.base = b;
  a.pool = pool;
  if (pool == PoolKind::MaxPool2) {
    a.symmetry = Symmetry::None;
    a.value2 = [b](double x1, double x2) -> Pair {
      const double m = std::max(b->value(x1), b->value(x2));
      return {m, m};
    };
    // Tie-breaking: the first slot wins.
    a.grad2 = [b](double x1, double x2) -> Pair {
      if (b->value(x1) >= b->value(x2)) return {b->derivative(x1), 0.0};
      return {0.0, b->derivative(x2)};
    };
    if (base.name == "relu") a.overrides = maxpool_relu_overrides();
  } else {
    a.symmetry = base.symmetry == Symmetry::Odd ? Symmetry::Odd : base.symmetry;
    a.value2 = [b](double x1, double x2) -> Pair {
      const double m = 0.5 * (b->value(x1) + b->value(x2));
      return {m, m};
    };
    a.grad2 = [b](double x1, double x2) -> Pair {
      return {0.5 * b->derivative(x1), 0.5 * b->derivative(x2)};
    };
    if (base.name == "relu") a.overrides = avgpool_relu_overrides();
  }
  return a;
}

const std::vector<std::string>& activation_names() {
  static const std::vector<std::string> names = {
      "linear", "relu", "tanh", "relu+maxpool", "relu+avgpool", "tanh+maxpool", "tanh+avgpool"};
  return names;
}

ActivationPtr activation_by_name(const std::string& name) {
  const auto plus = name.find('+');
  if (plus == std::string::npos) return std::make_shared<const ActivationSpec>(builtin(name));
  const std::string base = name.substr(0, plus);
  const std::string pool = name.substr(plus + 1);
  PoolKind kind;
  if (pool == "maxpool") {
    kind = PoolKind::MaxPool2;
  } else if (pool == "avgpool") {
    kind = PoolKind::AveragePool2;
  } else {
    throw UnknownActivation(name);
  }
  try {
    return std::make_shared<const ActivationSpec>(compose_pool(builtin(base), kind));
  } catch (const UnknownActivation&) {
    throw UnknownActivation(name);
  }
}

namespace {

double v_one_node(const ActivationSpec& act, VIntegrand g, double x, const QuadratureSpec& quad) {
  if (x == 0.0 && g != VIntegrand::ValueLaplacian) {
    const double v = g == VIntegrand::ValueSq ? act.value(0.0) : act.derivative(0.0);
    return v * v;
  }
  if (g == VIntegrand::ValueLaplacian && act.second_derivative) {
    if (x == 0.0) return act.value(0.0) * act.second_derivative(0.0);
    const double r = std::sqrt(x);
    return expect_g1([&](double z) { return act.value(r * z) * act.second_derivative(r * z); },
                     detail::scaled_quad(quad, act, r));
  }
  const double xx = g == VIntegrand::ValueLaplacian ? std::max(x, 1e-12) : x;
  const double r = std::sqrt(xx);
  const QuadratureSpec q = detail::scaled_quad(quad, act, r);
  switch (g) {
    case VIntegrand::ValueSq:
      return expect_g1([&](double z) { const double v = act.value(r * z); return v * v; }, q);
    case VIntegrand::GradSq:
      return expect_g1([&](double z) { const double d = act.derivative(r * z); return d * d; }, q);
    case VIntegrand::ValueLaplacian: {
      // Gaussian integration by parts: E[f f'' + f'^2] = E[f f' z] / sqrt(x).
      const double stein =
          expect_g1([&](double z) { return act.value(r * z) * act.derivative(r * z) * z; }, q) / r;
      const double grad =
          expect_g1([&](double z) { const double d = act.derivative(r * z); return d * d; }, q);
      return stein - grad;
    }
  }
  return 0.0;
}

double v_two_node(const ActivationSpec& act, VIntegrand g, double x, const QuadratureSpec& quad) {
  const double xx = g == VIntegrand::ValueLaplacian ? std::max(x, 1e-12) : x;
  if (xx == 0.0) {
    if (g == VIntegrand::ValueSq) {
      const double v = act.slot(0.0, 0.0);
      return v * v;
    }
    const Pair d = act.grad2(0.0, 0.0);
    return d[0] * d[0] + d[1] * d[1];
  }
  const double r = std::sqrt(xx);
  const QuadratureSpec q = detail::scaled_quad(quad, act, r);
  switch (g) {
    case VIntegrand::ValueSq:
      return expect_gn(
          [&](std::span<const double> z) {
            const double v = act.slot(r * z[0], r * z[1]);
            return v * v;
          },
          2, q, true);
    case VIntegrand::GradSq:
      return expect_gn(
          [&](std::span<const double> z) {
            const Pair d = act.grad2(r * z[0], r * z[1]);
            return d[0] * d[0] + d[1] * d[1];
          },
          2, q, true);
    case VIntegrand::ValueLaplacian: {
      const double stein = expect_gn(
                               [&](std::span<const double> z) {
                                 const double v = act.slot(r * z[0], r * z[1]);
                                 const Pair d = act.grad2(r * z[0], r * z[1]);
                                 return v * (d[0] * z[0] + d[1] * z[1]);
                               },
                               2, q, true) /
                           r;
      const double grad = expect_gn(
          [&](std::span<const double> z) {
            const Pair d = act.grad2(r * z[0], r * z[1]);
            return d[0] * d[0] + d[1] * d[1];
          },
          2, q, true);
      return stein - grad;
    }
  }
  return 0.0;
}

}  // namespace

double v_operator_quadrature(const ActivationSpec& act, VIntegrand g, double x,
                             const QuadratureSpec& quad) {
  if (!(x >= 0.0)) throw DomainError("v_operator: x must be >= 0");
  return act.arity == 1 ? v_one_node(act, g, x, quad) : v_two_node(act, g, x, quad);
}

double v_operator(const ActivationSpec& act, VIntegrand g, double x, const QuadratureSpec& quad) {
  if (!(x >= 0.0)) throw DomainError("v_operator: x must be >= 0");
  if (act.overrides) {
    const MomentOverrides& m = *act.overrides;
    switch (g) {
      case VIntegrand::ValueSq:
        if (m.second_moment) return m.second_moment(x);
        break;
      case VIntegrand::GradSq:
        if (m.grad_sq) return m.grad_sq(x);
        break;
      case VIntegrand::ValueLaplacian:
        if (m.value_laplacian) return m.value_laplacian(x);
        break;
    }
  }
  return v_operator_quadrature(act, g, x, quad);
}

}  // namespace critnet
