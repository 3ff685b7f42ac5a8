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

#include "critnet/relu_analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "critnet/errors.hpp"

namespace critnet {

namespace {

constexpr double kPi = std::numbers::pi;

// f expressed through y = 1 / sqrt(2G + 1):
//   f = 1 + [(1 - y^2) arctan(y) - y] / (pi y^2).
// For small y the bracket is summed as a series to avoid cancellation.
double f_from_y(double y, double gamma) {
  if (y < 0.1) {
    double term_power = y;  // y^(2k-1)
    const double y2 = y * y;
    double sum = 0.0;
    for (int k = 1; k <= 24; ++k) {
      const double coeff = 4.0 * k / ((2.0 * k + 1.0) * (2.0 * k - 1.0));
      sum += ((k % 2 == 1) ? -1.0 : 1.0) * coeff * term_power;
      term_power *= y2;
    }
    return 1.0 + sum / kPi;
  }
  return 1.0 + gamma - g_fn(gamma);
}

}  // namespace

double g_fn(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("g_fn: gamma must be >= 0");
  if (std::isinf(gamma)) return gamma;
  const double r = std::sqrt(2.0 * gamma + 1.0);
  return (2.0 / kPi) * gamma * std::atan(r) + r / kPi;
}

double f_fn(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("f_fn: gamma must be >= 0");
  if (std::isinf(gamma)) return 1.0;
  const double y = 1.0 / std::sqrt(2.0 * gamma + 1.0);
  return f_from_y(y, gamma);
}

double f_fn_from_one_minus_c(double one_minus_c) {
  if (!(one_minus_c > 0.0 && one_minus_c <= 1.0))
    throw DomainError("f_fn_from_one_minus_c: 1 - c must lie in (0, 1]");
  const double y = std::sqrt(one_minus_c / (2.0 - one_minus_c));
  const double gamma = (1.0 - one_minus_c) / one_minus_c;
  return f_from_y(y, gamma);
}

IgbState step_relu(const InitHyper& h, double sd2, double sc2) {
  if (!(sd2 > 0.0)) throw DomainError("step_relu: data variance must be > 0");
  if (!(sc2 >= 0.0)) throw DomainError("step_relu: centres variance must be >= 0");
  const double gamma = sc2 / sd2;
  IgbState out;
  out.sd2 = 0.5 * h.sigma_w2 * sd2 * f_fn(gamma);
  // sc2 * g(G) / G rewritten as sd2 * g(G): no singular quotient at G = 0.
  out.sc2 = 0.5 * h.sigma_w2 * sd2 * g_fn(gamma) + h.sigma_b2;
  return out;
}

double gamma_step(const InitHyper& h, double gamma, double lambda_next) {
  if (!(gamma >= 0.0)) throw DomainError("gamma_step: gamma must be >= 0");
  if (!(lambda_next > 0.0)) throw DomainError("gamma_step: lambda_next must be > 0");
  // The bias enters the centres only: G' = g/f + sb2 / sd2', and
  // sd2' = lambda' / (1 + G'). Solving for G' keeps the update exact.
  const double b = h.sigma_b2 / lambda_next;
  if (!(b < 1.0)) throw DomainError("gamma_step: lambda_next must exceed sigma_b2");
  return (g_fn(gamma) / f_fn(gamma) + b) / (1.0 - b);
}

std::vector<GammaTracePoint> relu_gamma_trace(const InitHyper& h, int depth, double sd2_0,
                                              double sc2_0) {
  if (depth < 0) throw DomainError("relu_gamma_trace: depth must be >= 0");
  std::vector<GammaTracePoint> out;
  out.reserve(static_cast<std::size_t>(depth) + 1);
  IgbState state{sd2_0, sc2_0};
  for (int l = 0; l <= depth; ++l) {
    GammaTracePoint p;
    p.layer = l;
    p.sd2 = state.sd2;
    p.sc2 = state.sc2;
    const double total = state.sd2 + state.sc2;
    p.c = state.sc2 / total;
    p.one_minus_c = state.sd2 / total;
    const double ratio = state.sc2 / state.sd2;
    p.saturated = !(ratio <= kGammaSaturation);
    p.gamma = p.saturated ? kGammaSaturation : ratio;
    out.push_back(p);
    if (l == depth) break;
    if (!(state.sd2 > 0.0) || !std::isfinite(total)) break;
    state = step_relu(h, state.sd2, state.sc2);
  }
  return out;
}

std::string to_string(DataVarFate v) {
  return v == DataVarFate::ToZero ? "DataVarToZero" : "DataVarDiverges";
}
std::string to_string(CentersFate v) {
  return v == CentersFate::Finite ? "CentersFinite" : "CentersDiverge";
}
std::string to_string(GammaRate v) {
  return v == GammaRate::Exponential ? "GammaExponential" : "GammaQuadratic";
}
std::string to_string(TotalVarFate v) {
  switch (v) {
    case TotalVarFate::ConvergesToZero: return "TotalVarToZero";
    case TotalVarFate::ConvergesPositive: return "TotalVarConverges";
    case TotalVarFate::Constant: return "TotalVarConstant";
    case TotalVarFate::DivergesLinearly: return "TotalVarDivergesLinearly";
    case TotalVarFate::DivergesExponentially: return "TotalVarDivergesExponentially";
  }
  return "unknown";
}

ReluRegime asymptotic_class(const InitHyper& h) {
  h.validate();
  const double sw = h.sigma_w2;
  const bool bias = h.sigma_b2 > 0.0;
  ReluRegime r{};
  r.data_var = sw <= 2.0 ? DataVarFate::ToZero : DataVarFate::Diverges;
  r.centers = (sw > 2.0 || (sw == 2.0 && bias)) ? CentersFate::Diverge : CentersFate::Finite;
  r.gamma_rate = (sw < 2.0 && bias) ? GammaRate::Exponential : GammaRate::Quadratic;
  if (sw < 2.0) {
    r.total_var = bias ? TotalVarFate::ConvergesPositive : TotalVarFate::ConvergesToZero;
  } else if (sw == 2.0) {
    r.total_var = bias ? TotalVarFate::DivergesLinearly : TotalVarFate::Constant;
  } else {
    r.total_var = TotalVarFate::DivergesExponentially;
  }
  return r;
}

}  // namespace critnet
