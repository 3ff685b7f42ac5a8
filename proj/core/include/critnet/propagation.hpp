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

#include <limits>
#include <string>
#include <vector>

#include "critnet/activations.hpp"
#include "critnet/propagation_types.hpp"
#include "critnet/quadrature.hpp"

namespace critnet {

// Drift ratios above this value are reported as +infinity.
inline constexpr double kGammaReportCap = 1e12;
inline constexpr double kDivergenceThreshold = 1e12;
inline constexpr double kCollapseThreshold = 1e-12;

// Per-layer theoretical state. The pair (lambda, q) is primary; sd2 = lambda - q
// is carried separately because it can be far more accurate than the
// difference of two rounded numbers once c is close to 1.
struct LayerStats {
  int layer = 0;
  double lambda = 1.0;     // signal variance
  double q = 0.0;          // signal covariance
  double c = 0.0;          // q / lambda
  double gamma = 0.0;      // sc2 / sd2, +inf beyond kGammaReportCap
  double chi_tilde = 0.0;  // sigma_w2 E[|grad f|^2] at lambda
  double chi1 = 0.0;       // (lambda / lambda_next) chi_tilde
  double alpha = 0.0;      // d lambda_next / d lambda
  double sd2 = 1.0;        // data variance, lambda - q
  double sc2 = 0.0;        // centres variance, q
  bool finite = true;      // false once the variance overflowed

  // Builds a state from (lambda, q); throws InvariantViolation when |q| > lambda.
  static LayerStats from_lambda_q(int layer, double lambda, double q);
  // Builds a state from (lambda, sd2) without forming lambda - sd2 twice.
  static LayerStats from_lambda_sd2(int layer, double lambda, double sd2);
};

struct DepthTrace {
  std::vector<LayerStats> layers;  // entry 0 is the initial condition
  VarianceFate fate = VarianceFate::Converges;
  int stopped_at = -1;             // first layer that crossed a threshold, or -1
};

// One layer of the mean-field recursion:
//   lambda' = sw2 E[f(u)^2] + sb2,   q' = sw2 E[f(u) f(u')] + sb2.
// The chi fields of the result are left at zero (depth_trace fills them).
LayerStats step_mf(const ActivationSpec& act, const InitHyper& h, const LayerStats& s,
                   const QuadratureSpec& quad = {});

// One layer in data/centres coordinates, computed by averaging over the node
// centres mu ~ N(0, sc2) the within-node statistics of f(mu + sqrt(sd2) eps):
//   sd2' = sw2 E_mu[Var_eps f],   sc2' = sw2 E_mu[(E_eps f)^2] + sb2.
// Always evaluated by quadrature (closed-form overrides are not used).
IgbState step_igb(const ActivationSpec& act, const InitHyper& h, double sd2, double sc2,
                  const QuadratureSpec& quad = {});

// (lambda, q) -> (sd2, sc2) and back.
IgbState mf_igb_map(double lambda, double q);
LayerStats igb_mf_map(double sd2, double sc2, int layer = 0);

// c = gamma / (1 + gamma) and its inverse; gamma = +inf maps to c = 1.
double gamma_to_c(double gamma);
double c_to_gamma(double c);

// sigma_w2 E[|grad f(sqrt(lambda) z)|^2].
double chi_tilde(const ActivationSpec& act, const InitHyper& h, double lambda,
                 const QuadratureSpec& quad = {});

// (lambda_l / lambda_l1) chi_tilde(lambda_l); throws DegenerateVariance when
// lambda_l1 == 0.
double chi1(const ActivationSpec& act, const InitHyper& h, double lambda_l, double lambda_l1,
            const QuadratureSpec& quad = {});

// d lambda' / d lambda = sigma_w2 E[|grad f|^2 + f Laplacian f].
double alpha(const ActivationSpec& act, const InitHyper& h, double lambda,
             const QuadratureSpec& quad = {});

// lambda' = sw2 E[f^2] + sb2.
double variance_map(const ActivationSpec& act, const InitHyper& h, double lambda,
                    const QuadratureSpec& quad = {});

// Iterates step_mf for `depth` layers. Stops early (and records the fate) when
// lambda exceeds kDivergenceThreshold or falls below kCollapseThreshold.
DepthTrace depth_trace(const ActivationSpec& act, const InitHyper& h, int depth,
                       const LayerStats& init = LayerStats{}, const QuadratureSpec& quad = {});

struct FixedPointOptions {
  int max_iterations = 10000;
  double tolerance = 1e-10;
  double start = 1.0;
};

struct FixedPointResult {
  VarianceFate fate = VarianceFate::NonConvergent;
  double q_star = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double residual = std::numeric_limits<double>::quiet_NaN();  // |F(q*) - q*|
  double last_lambda = std::numeric_limits<double>::quiet_NaN();
};

// Fixed point of the variance map, iterated from lambda = 1 and polished with
// Newton steps.
FixedPointResult fixed_point_variance(const ActivationSpec& act, const InitHyper& h,
                                      const QuadratureSpec& quad = {},
                                      const FixedPointOptions& opts = {});

enum class PhaseLabel {
  OrderedDeepPrejudice,
  TransientDeepPrejudice,  // edge of chaos
  ChaoticDeepPrejudice,
  ChaoticPrejudice,
  ChaoticNeutrality,
};

std::string to_string(PhaseLabel label);

struct PhaseOptions {
  double eoc_tolerance = 1e-3;   // |chi - 1| band for the edge of chaos
  int horizon = 500;             // depth of the correlation trace
  double c_settled = 1e-9;       // |c^L - c^(L-1)| below which c^L is taken as c*
  double unit_tolerance = 1e-6;  // c* within this of 1 counts as c* = 1
  double boundary_tolerance = 1e-6;  // |c* - 1/2| below which the label is ambiguous
  QuadratureSpec quad;
  FixedPointOptions fixed_point;
};

struct Phase {
  PhaseLabel label = PhaseLabel::OrderedDeepPrejudice;
  double c_star = 1.0;
  double chi_limit = 0.0;
  VarianceFate fate = VarianceFate::Converges;
  double q_star = std::numeric_limits<double>::quiet_NaN();
  bool ambiguous = false;
};

Phase classify_phase(const ActivationSpec& act, const InitHyper& h, const PhaseOptions& opts = {});

// Limiting correlation of the c-map at fixed variance lambda (the stable
// fixed point reached from c = 0). Returns 1 when c = 1 attracts everything.
double solve_c_star(const ActivationSpec& act, const InitHyper& h, double lambda,
                    const QuadratureSpec& quad = {});

// Predicted mean-square gradient per layer normalised to 1 at the output:
// entry `depth` is 1, entry l is entry l+1 times chi_tilde(lambda^l).
std::vector<double> gradient_profile(const ActivationSpec& act, const InitHyper& h, int depth,
                                     const QuadratureSpec& quad = {},
                                     double lambda0 = 1.0);

}  // namespace critnet
