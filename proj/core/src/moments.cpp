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

#include "critnet/moments.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "critnet/errors.hpp"
#include "scaled_quad.hpp"
#include "critnet/special.hpp"
#include "panel.hpp"

namespace critnet {

namespace {

void check_x(double x, const char* who) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw DomainError(std::string(who) + ": x must be finite and >= 0");
}

const MomentOverrides* overrides_of(const ActivationSpec& act, MomentPath path) {
  if (path == MomentPath::QuadratureOnly || !act.overrides) return nullptr;
  return &*act.overrides;
}

std::vector<double> scaled_kinks(const ActivationSpec& act, double root) {
  std::vector<double> k;
  for (double v : act.split_points()) k.push_back(v / root);
  return k;
}

bool is_maxpool(const ActivationSpec& act) {
  return act.arity == 2 && act.pool && *act.pool == PoolKind::MaxPool2;
}
bool is_avgpool(const ActivationSpec& act) {
  return act.arity == 2 && act.pool && *act.pool == PoolKind::AveragePool2;
}

// Maxpool over a nondecreasing base: f(u1, u2) = phi(max(u1, u2)); the maximum
// of two standard normals has density 2 pdf(z) cdf(z).
bool maxpool_monotone(const ActivationSpec& act) {
  return is_maxpool(act) && act.base && act.base->nondecreasing;
}

// E[g(z) * 2 cdf(z)] with kinks of g at the given points.
template <class G>
double max_weighted(G&& g, const QuadratureSpec& q) {
  return expect_g1([&](double z) { return 2.0 * g(z) * normal_cdf(z); }, q);
}

// ---- single-node quadrature ----------------------------------------------

double mean_1(const ActivationSpec& a, double x, const QuadratureSpec& quad) {
  if (x == 0.0) return a.value(0.0);
  const double r = std::sqrt(x);
  return expect_g1([&](double z) { return a.value(r * z); }, detail::scaled_quad(quad, a, r));
}

double stein_1(const ActivationSpec& a, double x, const QuadratureSpec& quad) {
  // E[phi phi' z] / sqrt(x) = E[phi'^2 + phi phi''] by Gaussian integration by parts.
  const double xx = std::max(x, 1e-12);
  const double r = std::sqrt(xx);
  if (a.second_derivative) {
    return expect_g1(
        [&](double z) {
          const double d = a.derivative(r * z);
          return d * d + a.value(r * z) * a.second_derivative(r * z);
        },
        detail::scaled_quad(quad, a, r));
  }
  return expect_g1([&](double z) { return a.value(r * z) * a.derivative(r * z) * z; },
                   detail::scaled_quad(quad, a, r)) /
         r;
}

// E[phi''] through Stein: E[phi' z] / sqrt(x).
double mean_second_derivative_1(const ActivationSpec& a, double x, const QuadratureSpec& quad) {
  const double xx = std::max(x, 1e-12);
  const double r = std::sqrt(xx);
  if (a.second_derivative) {
    return expect_g1([&](double z) { return a.second_derivative(r * z); },
                     detail::scaled_quad(quad, a, r));
  }
  return expect_g1([&](double z) { return a.derivative(r * z) * z; },
                   detail::scaled_quad(quad, a, r)) /
         r;
}

double cross_1(const ActivationSpec& a, double x, Correlation corr, const QuadratureSpec& quad) {
  if (x == 0.0) {
    const double v = a.value(0.0);
    return v * v;
  }
  const double r = std::sqrt(x);
  return expect_g2([&](double z, double w) { return a.value(r * z) * a.value(r * w); }, corr,
                   detail::scaled_quad(quad, a, r));
}

double hsd_1(const ActivationSpec& a, double x, Correlation corr, const QuadratureSpec& quad) {
  if (x == 0.0) return 0.0;
  const double r = std::sqrt(x);
  return expect_g2(
      [&](double z, double w) {
        const double d = a.value(r * z) - a.value(r * w);
        return 0.5 * d * d;
      },
      corr, detail::scaled_quad(quad, a, r));
}

// ---- maxpool pair moments --------------------------------------------------
//
// For M = max(u1, u2), M' = max(u1', u2') and a symmetric H:
//   E[H(M, M')] = 2 E_c[H(X, Y) F_c(X, Y)]
//               + 2 E_0[H(X, Y) cdf((X - cY)/s) cdf((Y - cX)/s)],
// where E_c is over a standard pair with correlation c, F_c its joint CDF, and
// E_0 is over independent standard normals. The first term collects the
// configurations in which the same node wins in both inputs; the second the
// configurations in which different nodes win.
template <class H>
double maxpool_pair(const ActivationSpec& base, double x, Correlation corr, H&& h,
                    const QuadratureSpec& quad) {
  const double r = std::sqrt(x);
  const double c = corr.c;
  const double s = corr.s;
  const auto kinks = scaled_kinks(base, r);
  auto hz = [&](double z, double w) { return h(base.value(r * z), base.value(r * w)); };

  if (s == 0.0) {
    if (c > 0.0) return max_weighted([&](double z) { return hz(z, z); }, quad.with_kinks(kinks));
    // c = -1: u' = -u, so M' = -min(u1, u2).
    return expect_gn(
        [&](std::span<const double> z) {
          return hz(std::max(z[0], z[1]), -std::min(z[0], z[1]));
        },
        2, quad.with_kinks(kinks), true);
  }

  const double same = 2.0 * expect_g2(
                                [&](double z, double w) {
                                  return hz(z, w) * bivariate_normal_cdf(z, w, c);
                                },
                                corr, quad.with_kinks(kinks));

  const double spread = quad.truncation_radius;
  double cross_term = 0.0;
  if (quad.backend == QuadBackend::Hermite) {
    cross_term = 2.0 * expect_gn(
                           [&](std::span<const double> z) {
                             return hz(z[0], z[1]) * normal_cdf((z[0] - c * z[1]) / s) *
                                    normal_cdf((z[1] - c * z[0]) / s);
                           },
                           2, quad);
  } else {
    // The integrand switches on across bands of width ~ s around w = c z and
    // w = z / c; both bands pinch at the origin.
    std::vector<double> outer = kinks;
    outer.push_back(0.0);
    for (double k : kinks) {
      for (int j = -1; j <= 3; ++j) {
        const double d = s * std::ldexp(1.0, j);
        if (d < spread) {
          outer.push_back(k - d);
          outer.push_back(k + d);
        }
      }
    }
    for (int j = -1; j <= 3; ++j) {
      const double d = s * std::ldexp(1.0, j);
      if (d < spread) {
        outer.push_back(-d);
        outer.push_back(d);
      }
    }
    const detail::PanelIntegrator integ(quad.node_count, spread);
    std::vector<double> inner;
    cross_term = 2.0 * integ.integrate(outer, [&](double z) {
      inner = kinks;
      auto add_band = [&](double centre, double width) {
        inner.push_back(centre);
        for (int j = -1; j <= 3; ++j) {
          const double d = width * std::ldexp(1.0, j);
          if (d < 2.0 * spread) {
            inner.push_back(centre - d);
            inner.push_back(centre + d);
          }
        }
      };
      add_band(c * z, s);
      if (c != 0.0) add_band(z / c, s / std::abs(c));
      return integ.integrate(inner, [&](double w) {
        return hz(z, w) * normal_cdf((z - c * w) / s) * normal_cdf((w - c * z) / s);
      });
    });
  }
  return same + cross_term;
}

}  // namespace

double act_mean(const ActivationSpec& act, double x, const QuadratureSpec& quad, MomentPath path) {
  check_x(x, "act_mean");
  if (const auto* m = overrides_of(act, path); m && m->mean) return m->mean(x);
  if (act.arity == 1) return mean_1(act, x, quad);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) return mean_1(b, x, quad);
  if (maxpool_monotone(act)) {
    if (x == 0.0) return b.value(0.0);
    const double r = std::sqrt(x);
    return max_weighted([&](double z) { return b.value(r * z); }, detail::scaled_quad(quad, b, r));
  }
  if (x == 0.0) return act.slot(0.0, 0.0);
  const double r = std::sqrt(x);
  return expect_gn([&](std::span<const double> z) { return act.slot(r * z[0], r * z[1]); }, 2,
                   detail::scaled_quad(quad, act, r), true);
}

double second_moment(const ActivationSpec& act, double x, const QuadratureSpec& quad,
                     MomentPath path) {
  check_x(x, "second_moment");
  if (const auto* m = overrides_of(act, path); m && m->second_moment) return m->second_moment(x);
  if (act.arity == 1) return v_operator_quadrature(act, VIntegrand::ValueSq, x, quad);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) {
    const double mu = mean_1(b, x, quad);
    return 0.5 * (v_operator_quadrature(b, VIntegrand::ValueSq, x, quad) + mu * mu);
  }
  if (maxpool_monotone(act)) {
    if (x == 0.0) {
      const double v = b.value(0.0);
      return v * v;
    }
    const double r = std::sqrt(x);
    return max_weighted(
        [&](double z) {
          const double v = b.value(r * z);
          return v * v;
        },
        detail::scaled_quad(quad, b, r));
  }
  return v_operator_quadrature(act, VIntegrand::ValueSq, x, quad);
}

double grad_sq(const ActivationSpec& act, double x, const QuadratureSpec& quad, MomentPath path) {
  check_x(x, "grad_sq");
  if (const auto* m = overrides_of(act, path); m && m->grad_sq) return m->grad_sq(x);
  if (act.arity == 1) return v_operator_quadrature(act, VIntegrand::GradSq, x, quad);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) return 0.5 * v_operator_quadrature(b, VIntegrand::GradSq, x, quad);
  if (maxpool_monotone(act)) {
    if (x == 0.0) {
      const double d = b.derivative(0.0);
      return d * d;
    }
    const double r = std::sqrt(x);
    return max_weighted(
        [&](double z) {
          const double d = b.derivative(r * z);
          return d * d;
        },
        detail::scaled_quad(quad, b, r));
  }
  return v_operator_quadrature(act, VIntegrand::GradSq, x, quad);
}

double value_laplacian(const ActivationSpec& act, double x, const QuadratureSpec& quad,
                       MomentPath path) {
  check_x(x, "value_laplacian");
  if (const auto* m = overrides_of(act, path); m && m->value_laplacian) return m->value_laplacian(x);
  if (act.arity == 1) return stein_1(act, x, quad) - grad_sq(act, x, quad, MomentPath::QuadratureOnly);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) {
    // f = (phi1 + phi2)/2, Laplacian f = (phi1'' + phi2'')/2:
    // E[f Lap f] = (E[phi phi''] + E[phi] E[phi'']) / 2.
    const double phi_phi2 = stein_1(b, x, quad) - v_operator_quadrature(b, VIntegrand::GradSq, x, quad);
    return 0.5 * (phi_phi2 + mean_1(b, x, quad) * mean_second_derivative_1(b, x, quad));
  }
  if (maxpool_monotone(act)) {
    const double xx = std::max(x, 1e-12);
    const double r = std::sqrt(xx);
    const double stein =
        max_weighted([&](double z) { return b.value(r * z) * b.derivative(r * z) * z; },
                     detail::scaled_quad(quad, b, r)) /
        r;
    return stein - grad_sq(act, xx, quad, MomentPath::QuadratureOnly);
  }
  return v_operator_quadrature(act, VIntegrand::ValueLaplacian, x, quad);
}

double alpha_factor(const ActivationSpec& act, double x, const QuadratureSpec& quad,
                    MomentPath path) {
  return grad_sq(act, x, quad, path) + value_laplacian(act, x, quad, path);
}

double cross_moment(const ActivationSpec& act, double x, Correlation corr,
                    const QuadratureSpec& quad, MomentPath path) {
  check_x(x, "cross_moment");
  if (!(std::abs(corr.c) <= 1.0)) throw DomainError("cross_moment: correlation must lie in [-1, 1]");
  if (const auto* m = overrides_of(act, path); m && m->cross) return m->cross(x, corr);
  if (act.arity == 1) return cross_1(act, x, corr, quad);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) {
    const double mu = mean_1(b, x, quad);
    return 0.5 * (cross_1(b, x, corr, quad) + mu * mu);
  }
  if (maxpool_monotone(act)) {
    if (x == 0.0) {
      const double v = b.value(0.0);
      return v * v;
    }
    return maxpool_pair(b, x, corr, [](double p, double q) { return p * q; }, quad);
  }
  throw Unsupported("cross_moment: maxpool over a non-monotone base activation");
}

double half_sq_diff(const ActivationSpec& act, double x, Correlation corr,
                    const QuadratureSpec& quad, MomentPath path) {
  check_x(x, "half_sq_diff");
  if (!(std::abs(corr.c) <= 1.0)) throw DomainError("half_sq_diff: correlation must lie in [-1, 1]");
  if (const auto* m = overrides_of(act, path); m && m->half_sq_diff) return m->half_sq_diff(x, corr);
  if (act.arity == 1) return hsd_1(act, x, corr, quad);
  const ActivationSpec& b = *act.base;
  if (is_avgpool(act)) return 0.5 * hsd_1(b, x, corr, quad);
  if (maxpool_monotone(act)) {
    if (x == 0.0) return 0.0;
    return maxpool_pair(
        b, x, corr,
        [](double p, double q) {
          const double d = p - q;
          return 0.5 * d * d;
        },
        quad);
  }
  throw Unsupported("half_sq_diff: maxpool over a non-monotone base activation");
}

}  // namespace critnet
