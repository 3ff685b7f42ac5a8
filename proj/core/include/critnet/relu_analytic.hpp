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

#include "critnet/propagation_types.hpp"

namespace critnet {

// Closed forms for ReLU networks in data/centres coordinates.
//
//   g(G) = (2/pi) G arctan(sqrt(2G + 1)) + sqrt(2G + 1) / pi
//   f(G) = 1 + G - g(G)
//
// give the exact one-layer maps
//   sd2' = (sw2 sd2 / 2) f(G),   sc2' = (sw2 sd2 / 2) g(G) + sb2,   G = sc2 / sd2.
double g_fn(double gamma);
double f_fn(double gamma);

// f(c / (1 - c)) evaluated from 1 - c directly, so that it stays accurate when
// c rounds to 1 (requires 0 < one_minus_c <= 1).
double f_fn_from_one_minus_c(double one_minus_c);

// Exact one-step update of (sd2, sc2); no quadrature involved.
IgbState step_relu(const InitHyper& h, double sd2, double sc2);

// Exact update of the drift ratio given the next total variance:
//   G' = g(G)/f(G) + sb2 / sd2'  with  sd2' = lambda' / (1 + G'),
// i.e. G' = (g/f + sb2/lambda') / (1 - sb2/lambda'). To first order in
// sb2/lambda' this is g/f + sb2/lambda'.
double gamma_step(const InitHyper& h, double gamma, double lambda_next);

// Cap used when reporting the drift ratio.
inline constexpr double kGammaSaturation = 1e12;

struct GammaTracePoint {
  int layer = 0;
  double sd2 = 0.0;
  double sc2 = 0.0;
  double gamma = 0.0;      // capped at kGammaSaturation
  double c = 0.0;          // sc2 / (sd2 + sc2)
  double one_minus_c = 1.0;
  bool saturated = false;
};

// Iterates step_relu for `depth` layers starting from (sd2_0, sc2_0); entry 0
// is the initial state.
std::vector<GammaTracePoint> relu_gamma_trace(const InitHyper& h, int depth, double sd2_0 = 1.0,
                                              double sc2_0 = 0.0);

enum class DataVarFate { ToZero, Diverges };
enum class CentersFate { Finite, Diverge };
enum class GammaRate { Exponential, Quadratic };
enum class TotalVarFate { ConvergesToZero, ConvergesPositive, Constant, DivergesLinearly,
                          DivergesExponentially };

struct ReluRegime {
  DataVarFate data_var;
  CentersFate centers;
  GammaRate gamma_rate;
  TotalVarFate total_var;
};

std::string to_string(DataVarFate v);
std::string to_string(CentersFate v);
std::string to_string(GammaRate v);
std::string to_string(TotalVarFate v);

// Large-depth regime of a ReLU network as a function of (sw2, sb2).
ReluRegime asymptotic_class(const InitHyper& h);

}  // namespace critnet
