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

#include "critnet/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "critnet/errors.hpp"
#include "critnet/moments.hpp"
#include "critnet/special.hpp"
#include "panel.hpp"

namespace critnet {

void InitHyper::validate() const {
  if (!std::isfinite(sigma_w2) || !(sigma_w2 > 0.0))
    throw DomainError("sigma_w2 must be finite and > 0");
  if (!std::isfinite(sigma_b2) || !(sigma_b2 >= 0.0))
    throw DomainError("sigma_b2 must be finite and >= 0");
}

std::string to_string(VarianceFate fate) {
  switch (fate) {
    case VarianceFate::Converges: return "converges";
    case VarianceFate::Diverges: return "diverges";
    case VarianceFate::Collapses: return "collapses";
    case VarianceFate::NonConvergent: return "nonconvergent";
  }
  return "unknown";
}

std::string to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::OrderedDeepPrejudice: return "OrderedDeepPrejudice";
    case PhaseLabel::TransientDeepPrejudice: return "TransientDeepPrejudice";
    case PhaseLabel::ChaoticDeepPrejudice: return "ChaoticDeepPrejudice";
    case PhaseLabel::ChaoticPrejudice: return "ChaoticPrejudice";
    case PhaseLabel::ChaoticNeutrality: return "ChaoticNeutrality";
  }
  return "unknown";
}

// ---- state conversions -----------------------------------------------------

LayerStats LayerStats::from_lambda_sd2(int layer, double lambda, double sd2) {
  LayerStats s;
  s.layer = layer;
  s.lambda = lambda;
  s.sd2 = sd2;
  s.q = lambda - sd2;
  s.sc2 = s.q;
  if (lambda > 0.0) {
    const double one_minus_c = sd2 / lambda;
    s.c = one_minus_c < 0.5 ? 1.0 - one_minus_c : s.q / lambda;
  } else {
    s.c = 1.0;
  }
  if (sd2 > 0.0) {
    const double g = s.sc2 / sd2;
    s.gamma = g > kGammaReportCap ? std::numeric_limits<double>::infinity() : g;
  } else {
    s.gamma = std::numeric_limits<double>::infinity();
  }
  s.finite = std::isfinite(lambda);
  return s;
}

LayerStats LayerStats::from_lambda_q(int layer, double lambda, double q) {
  if (!(lambda >= 0.0)) throw InvariantViolation("lambda must be >= 0");
  if (!(std::abs(q) <= lambda)) throw InvariantViolation("|q| must not exceed lambda");
  return from_lambda_sd2(layer, lambda, lambda - q);
}

IgbState mf_igb_map(double lambda, double q) {
  if (!(q <= lambda)) throw InvariantViolation("mf_igb_map: q exceeds lambda");
  if (!(q >= 0.0)) throw InvariantViolation("mf_igb_map: q must be >= 0");
  return IgbState{lambda - q, q};
}

LayerStats igb_mf_map(double sd2, double sc2, int layer) {
  if (!(sd2 >= 0.0) || !(sc2 >= 0.0)) throw InvariantViolation("igb_mf_map: variances must be >= 0");
  return LayerStats::from_lambda_sd2(layer, sd2 + sc2, sd2);
}

double gamma_to_c(double gamma) {
  if (!(gamma >= 0.0)) throw DomainError("gamma_to_c: gamma must be >= 0");
  if (std::isinf(gamma)) return 1.0;
  return gamma / (1.0 + gamma);
}

double c_to_gamma(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw DomainError("c_to_gamma: c must lie in [0, 1]");
  if (c == 1.0) return std::numeric_limits<double>::infinity();
  return c / (1.0 - c);
}

// ---- scalar maps -----------------------------------------------------------

double variance_map(const ActivationSpec& act, const InitHyper& h, double lambda,
                    const QuadratureSpec& quad) {
  h.validate();
  return h.sigma_w2 * second_moment(act, lambda, quad) + h.sigma_b2;
}

double chi_tilde(const ActivationSpec& act, const InitHyper& h, double lambda,
                 const QuadratureSpec& quad) {
  h.validate();
  return h.sigma_w2 * grad_sq(act, lambda, quad);
}

double chi1(const ActivationSpec& act, const InitHyper& h, double lambda_l, double lambda_l1,
            const QuadratureSpec& quad) {
  if (lambda_l1 == 0.0) throw DegenerateVariance("chi1: next-layer variance is zero");
  if (!(lambda_l1 > 0.0)) throw DomainError("chi1: next-layer variance must be > 0");
  return lambda_l / lambda_l1 * chi_tilde(act, h, lambda_l, quad);
}

double alpha(const ActivationSpec& act, const InitHyper& h, double lambda,
             const QuadratureSpec& quad) {
  h.validate();
  return h.sigma_w2 * alpha_factor(act, lambda, quad);
}

// ---- mean-field step -------------------------------------------------------

LayerStats step_mf(const ActivationSpec& act, const InitHyper& h, const LayerStats& s,
                   const QuadratureSpec& quad) {
  h.validate();
  if (!(s.lambda >= 0.0) || !std::isfinite(s.lambda))
    throw DomainError("step_mf: lambda must be finite and >= 0");
  if (!(std::abs(s.q) <= s.lambda * (1.0 + 1e-12)))
    throw InvariantViolation("step_mf: |q| exceeds lambda");
  const double lambda_next = h.sigma_w2 * second_moment(act, s.lambda, quad) + h.sigma_b2;
  if (!std::isfinite(lambda_next)) {
    LayerStats out;
    out.layer = s.layer + 1;
    out.lambda = std::numeric_limits<double>::infinity();
    out.q = out.sc2 = out.sd2 = std::numeric_limits<double>::quiet_NaN();
    out.c = out.gamma = std::numeric_limits<double>::quiet_NaN();
    out.finite = false;
    return out;
  }
  if (s.lambda == 0.0) return LayerStats::from_lambda_sd2(s.layer + 1, lambda_next, 0.0);

  const double one_minus_c = std::clamp(s.sd2 / s.lambda, 0.0, 2.0);
  const Correlation corr = Correlation::from_one_minus_c(one_minus_c);
  double sd2_next;
  if (corr.c >= 0.5) {
    // lambda' - q' = sw2 E[(f(u) - f(u'))^2] / 2: no cancellation as c -> 1.
    sd2_next = h.sigma_w2 * half_sq_diff(act, s.lambda, corr, quad);
  } else {
    const double q_next = h.sigma_w2 * cross_moment(act, s.lambda, corr, quad) + h.sigma_b2;
    sd2_next = lambda_next - q_next;
  }
  sd2_next = std::clamp(sd2_next, 0.0, 2.0 * lambda_next);
  return LayerStats::from_lambda_sd2(s.layer + 1, lambda_next, sd2_next);
}

// ---- data/centres step -----------------------------------------------------

namespace {

// One integration axis against the standard normal density: composite
// Gauss-Legendre panels with breakpoints, or a plain Gauss-Hermite rule.
class Axis {
 public:
  Axis(const QuadratureSpec& quad, int nodes)
      : hermite_(quad.backend == QuadBackend::Hermite),
        panels_(nodes, quad.truncation_radius),
        rule_(hermite_ ? gaussian_rule(QuadratureSpec::hermite(quad.node_count)) : nullptr) {}

  template <class F>
  double integrate(std::span<const double> breaks, F&& f) const {
    if (hermite_) return detail::apply_rule(*rule_, f);
    return panels_.integrate(breaks, f);
  }

  double radius() const { return panels_.radius(); }

 private:
  bool hermite_;
  detail::PanelIntegrator panels_;
  std::shared_ptr<const GaussianRule> rule_;
};

// Adds centre and centre +- width * 2^j (j = -2, ...) while inside the radius.
void add_refinement(std::vector<double>& out, double centre, double width, double radius,
                    int jmin = -2) {
  out.push_back(centre);
  if (!(width > 0.0)) return;
  for (int j = jmin; j < 200; ++j) {
    const double d = width * std::ldexp(1.0, j);
    if (d > 2.0 * radius) break;
    out.push_back(centre - d);
    out.push_back(centre + d);
  }
}

struct NodeStats {
  double mean = 0.0;
  double var = 0.0;
};

// Within-node statistics of phi(mu + sigma eps) over eps ~ N(0, 1).
NodeStats node_stats(const ActivationSpec& phi, double mu, double sigma, const Axis& axis,
                     std::vector<double>& breaks) {
  breaks.clear();
  for (double k : phi.split_points()) breaks.push_back((k - mu) / sigma);
  const double shift = phi.value(mu);
  const double m = axis.integrate(breaks, [&](double e) { return phi.value(mu + sigma * e); });
  const double e2 = axis.integrate(breaks, [&](double e) {
    const double d = phi.value(mu + sigma * e) - shift;
    return d * d;
  });
  const double dm = m - shift;
  return {m, std::max(0.0, e2 - dm * dm)};
}

struct CentreAverages {
  double mean = 0.0;     // E_mu[m]
  double mean_sq = 0.0;  // E_mu[m^2]
  double var = 0.0;      // E_mu[v]
};

// Calls visit(z, weight) for every node of a composite Gauss-Legendre rule on
// the given sorted edges; the weights include the standard normal density.
template <class Visit>
void for_each_panel_node(const std::vector<double>& edges, const GaussianRule& rule,
                         Visit&& visit) {
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double z = mid + half * rule.nodes[k];
      visit(z, half * rule.weights[k] * normal_pdf(z));
    }
  }
}

// Calls visit(z, weight) for every node of the outer rule over t ~ N(0, 1).
template <class Visit>
void for_each_outer_node(const QuadratureSpec& quad, int nodes, const std::vector<double>& breaks,
                         Visit&& visit) {
  if (quad.backend == QuadBackend::Hermite) {
    const auto rule = gaussian_rule(QuadratureSpec::hermite(quad.node_count));
    for (std::size_t i = 0; i < rule->nodes.size(); ++i) visit(rule->nodes[i], rule->weights[i]);
    return;
  }
  std::vector<double> edges;
  detail::panel_edges(breaks, quad.truncation_radius, edges);
  for_each_panel_node(edges, *legendre_rule(nodes), visit);
}

CentreAverages centre_averages_1(const ActivationSpec& phi, double sd2, double sc2,
                                 const QuadratureSpec& quad) {
  const double sigma = std::sqrt(sd2);
  const Axis inner(quad, quad.node_count);
  std::vector<double> buf;
  if (sc2 == 0.0) {
    const NodeStats st = node_stats(phi, 0.0, sigma, inner, buf);
    return {st.mean, st.mean * st.mean, st.var};
  }
  const double tau = std::sqrt(sc2);
  // The node statistics vary on the scale sigma / tau around every kink.
  std::vector<double> outer_breaks;
  for (double k : phi.split_points())
    add_refinement(outer_breaks, k / tau, sigma / tau, quad.truncation_radius);
  CentreAverages acc;
  for_each_outer_node(quad, quad.node_count, outer_breaks, [&](double t, double w) {
    const NodeStats st = node_stats(phi, tau * t, sigma, inner, buf);
    acc.mean += w * st.mean;
    acc.mean_sq += w * st.mean * st.mean;
    acc.var += w * st.var;
  });
  if (!std::isfinite(acc.mean_sq) || !std::isfinite(acc.var))
    detail::throw_non_finite(0.0, acc.mean_sq + acc.var);
  return acc;
}

// Within-window statistics of phi(max(mu1 + sigma e1, mu2 + sigma e2)) for a
// nondecreasing phi: node i wins with probability cdf((mu_i - mu_j)/sigma + e_i).
NodeStats max_node_stats(const ActivationSpec& phi, double mu1, double mu2, double sigma,
                         const Axis& axis, std::vector<double>& breaks) {
  const double shift = phi.value(std::max(mu1, mu2));
  double m = 0.0;
  double e2 = 0.0;
  const double mus[2] = {mu1, mu2};
  for (int i = 0; i < 2; ++i) {
    const double mu = mus[i];
    const double a = (mus[i] - mus[1 - i]) / sigma;
    breaks.clear();
    for (double k : phi.split_points()) breaks.push_back((k - mu) / sigma);
    breaks.push_back(-a);
    m += axis.integrate(breaks, [&](double e) { return phi.value(mu + sigma * e) * normal_cdf(a + e); });
    e2 += axis.integrate(breaks, [&](double e) {
      const double d = phi.value(mu + sigma * e) - shift;
      return d * d * normal_cdf(a + e);
    });
  }
  const double dm = m - shift;
  return {m, std::max(0.0, e2 - dm * dm)};
}

IgbState step_igb_maxpool(const ActivationSpec& act, const InitHyper& h, double sd2, double sc2,
                          const QuadratureSpec& quad) {
  const ActivationSpec& phi = *act.base;
  const double sigma = std::sqrt(sd2);
  // The centre plane dominates the cost (quadratic in its node count) and is
  // already finely split along the ridge and the kinks, so 16 Gauss-Legendre
  // nodes per panel suffice there; the within-window axis keeps the full rule,
  // because the window probability cdf(a + e) spans wide panels.
  const int nodes = std::min(quad.node_count, 16);
  const Axis inner(quad, quad.node_count);
  std::vector<double> buf;
  if (sc2 == 0.0) {
    const NodeStats st = max_node_stats(phi, 0.0, 0.0, sigma, inner, buf);
    return {h.sigma_w2 * st.var, h.sigma_w2 * st.mean * st.mean + h.sigma_b2};
  }
  const double tau = std::sqrt(sc2);
  const double w = sigma / tau;
  double mean_sq = 0.0;
  double var = 0.0;
  auto accumulate = [&](double t1, double t2, double weight) {
    const NodeStats st = max_node_stats(phi, tau * t1, tau * t2, sigma, inner, buf);
    mean_sq += weight * st.mean * st.mean;
    var += weight * st.var;
  };

  if (quad.backend == QuadBackend::Hermite) {
    const auto rule = gaussian_rule(QuadratureSpec::hermite(quad.node_count));
    for (std::size_t i = 0; i < rule->nodes.size(); ++i)
      for (std::size_t j = 0; j < rule->nodes.size(); ++j)
        accumulate(rule->nodes[i], rule->nodes[j], rule->weights[i] * rule->weights[j]);
  } else {
    // The window statistics are symmetric in (t1, t2), so only t2 < t1 is
    // integrated. They vary on the scale w = sigma / tau across the ridge
    // t1 = t2 and around every kink, where extra panels are placed.
    const double radius = quad.truncation_radius;
    const auto& rule = *legendre_rule(nodes);
    std::vector<double> kink_breaks;
    for (double k : phi.split_points()) add_refinement(kink_breaks, k / tau, w, radius);
    std::vector<double> outer_edges;
    detail::panel_edges(kink_breaks, radius, outer_edges);
    std::vector<double> inner_breaks;
    std::vector<double> inner_edges;
    for_each_panel_node(outer_edges, rule, [&](double t1, double w1) {
      inner_breaks.clear();
      for (double b : kink_breaks)
        if (b < t1) inner_breaks.push_back(b);
      for (int j = -1; j < 200; ++j) {
        const double d = w * std::ldexp(1.0, j);
        if (d > 2.0 * radius) break;
        inner_breaks.push_back(t1 - d);
      }
      detail::panel_edges(inner_breaks, radius, inner_edges);
      // Replace the upper end R by t1.
      while (inner_edges.size() > 1 && inner_edges.back() >= t1) inner_edges.pop_back();
      inner_edges.push_back(t1);
      if (inner_edges.size() < 2) return;
      for_each_panel_node(inner_edges, rule,
                          [&](double t2, double w2) { accumulate(t1, t2, 2.0 * w1 * w2); });
    });
  }
  if (!std::isfinite(mean_sq) || !std::isfinite(var)) detail::throw_non_finite(0.0, mean_sq + var);
  return {h.sigma_w2 * var, h.sigma_w2 * mean_sq + h.sigma_b2};
}

}  // namespace

IgbState step_igb(const ActivationSpec& act, const InitHyper& h, double sd2, double sc2,
                  const QuadratureSpec& quad) {
  h.validate();
  quad.validate();
  if (!(sd2 > 0.0) || !std::isfinite(sd2)) throw DomainError("step_igb: sd2 must be finite and > 0");
  if (!(sc2 >= 0.0) || !std::isfinite(sc2)) throw DomainError("step_igb: sc2 must be finite and >= 0");
  if (act.arity == 1) {
    const CentreAverages a = centre_averages_1(act, sd2, sc2, quad);
    return {h.sigma_w2 * a.var, h.sigma_w2 * a.mean_sq + h.sigma_b2};
  }
  if (act.pool && *act.pool == PoolKind::AveragePool2) {
    // f = (phi1 + phi2) / 2 over two independent nodes.
    const CentreAverages a = centre_averages_1(*act.base, sd2, sc2, quad);
    return {h.sigma_w2 * 0.5 * a.var,
            h.sigma_w2 * 0.5 * (a.mean_sq + a.mean * a.mean) + h.sigma_b2};
  }
  if (act.pool && *act.pool == PoolKind::MaxPool2 && act.base->nondecreasing)
    return step_igb_maxpool(act, h, sd2, sc2, quad);
  throw Unsupported("step_igb: maxpool over a non-monotone base activation");
}

}  // namespace critnet

namespace critnet {

// ---- depth traces ----------------------------------------------------------

namespace {

void fill_chi(const ActivationSpec& act, const InitHyper& h, LayerStats& s, double lambda_next,
              const QuadratureSpec& quad) {
  s.chi_tilde = chi_tilde(act, h, s.lambda, quad);
  s.alpha = alpha(act, h, s.lambda, quad);
  s.chi1 = (lambda_next > 0.0 && std::isfinite(lambda_next))
               ? s.lambda / lambda_next * s.chi_tilde
               : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

DepthTrace depth_trace(const ActivationSpec& act, const InitHyper& h, int depth,
                       const LayerStats& init, const QuadratureSpec& quad) {
  h.validate();
  if (depth < 1) throw DomainError("depth_trace: depth must be >= 1");
  DepthTrace trace;
  trace.layers.reserve(static_cast<std::size_t>(depth) + 1);
  LayerStats current = init;
  current.layer = 0;
  for (int l = 0; l < depth; ++l) {
    LayerStats next = step_mf(act, h, current, quad);
    fill_chi(act, h, current, next.lambda, quad);
    trace.layers.push_back(current);
    if (!next.finite || next.lambda > kDivergenceThreshold) {
      trace.fate = VarianceFate::Diverges;
      trace.stopped_at = l + 1;
      return trace;
    }
    if (next.lambda < kCollapseThreshold) {
      trace.fate = VarianceFate::Collapses;
      trace.stopped_at = l + 1;
      return trace;
    }
    current = next;
  }
  fill_chi(act, h, current, variance_map(act, h, current.lambda, quad), quad);
  trace.layers.push_back(current);
  return trace;
}

// ---- variance fixed point --------------------------------------------------

FixedPointResult fixed_point_variance(const ActivationSpec& act, const InitHyper& h,
                                      const QuadratureSpec& quad, const FixedPointOptions& opts) {
  h.validate();
  FixedPointResult res;
  auto F = [&](double x) { return variance_map(act, h, x, quad); };

  // Newton polish on G(x) = F(x) - x; accepted only at an attracting root.
  // A Newton step to x <= 0 means the only root left is the zero variance.
  bool root_at_zero = false;
  auto polish = [&](double x) -> bool {
    for (int it = 0; it < 50; ++it) {
      const double g = F(x) - x;
      if (std::abs(g) < 1e-12 * std::max(1.0, x)) {
        const double a = alpha(act, h, x, quad);
        if (!(a < 1.0 + 1e-9) || !(x > 0.0)) return false;
        res.q_star = x;
        res.residual = std::abs(g);
        res.fate = VarianceFate::Converges;
        return true;
      }
      const double slope = alpha(act, h, x, quad) - 1.0;
      if (!(std::abs(slope) > 1e-14)) return false;
      const double next = x - g / slope;
      if (!(next > 0.0)) root_at_zero = std::isfinite(next) && F(x) < x;
      if (!(next > 0.0) || !std::isfinite(next)) return false;
      x = next;
    }
    return false;
  };

  double x = opts.start;
  double prev_step = std::numeric_limits<double>::infinity();
  bool growth_steady = false;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    const double next = F(x);
    res.iterations = it;
    res.last_lambda = next;
    if (!std::isfinite(next) || next > kDivergenceThreshold) {
      res.fate = VarianceFate::Diverges;
      return res;
    }
    if (next < kCollapseThreshold) {
      res.fate = VarianceFate::Collapses;
      return res;
    }
    const double step = next - x;
    if (std::abs(step) < opts.tolerance * std::max(1.0, x)) {
      if (!polish(next)) {
        if (root_at_zero) {
          res.fate = VarianceFate::Collapses;
          return res;
        }
        res.q_star = next;
        res.residual = std::abs(F(next) - next);
        res.fate = VarianceFate::Converges;
      }
      return res;
    }
    // Growth whose increments do not shrink (linear or faster) can never settle.
    growth_steady = step > 0.0 && step >= prev_step * (1.0 - 1e-9);
    prev_step = step;
    x = next;
  }
  if (growth_steady) {
    res.fate = VarianceFate::Diverges;
    return res;
  }
  if (polish(x)) return res;
  res.fate = root_at_zero ? VarianceFate::Collapses : VarianceFate::NonConvergent;
  return res;
}

// ---- phase classification --------------------------------------------------

double solve_c_star(const ActivationSpec& act, const InitHyper& h, double lambda,
                    const QuadratureSpec& quad) {
  h.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw DomainError("solve_c_star: lambda must be finite and > 0");
  // Map of 1 - c at fixed input variance.
  auto T = [&](double delta) {
    const LayerStats s = LayerStats::from_lambda_sd2(0, lambda, delta * lambda);
    const LayerStats n = step_mf(act, h, s, quad);
    return n.sd2 / n.lambda;
  };
  // Starting from c = 0 the iteration settles on the largest stable root of
  // T(delta) = delta below 1: scan downwards for the first sign change.
  double upper = 1.0;
  if (T(upper) - upper > 0.0) upper = 2.0;  // correlation driven negative
  double hi = upper;
  for (int k = 1; k <= 80; ++k) {
    const double lo = upper * std::ldexp(1.0, -k);
    if (T(lo) - lo > 0.0) {
      double a = lo;
      double b = hi;
      for (int it = 0; it < 100 && b - a > 1e-15 * b; ++it) {
        const double mid = std::sqrt(a * b);
        if (T(mid) - mid > 0.0) {
          a = mid;
        } else {
          b = mid;
        }
      }
      return 1.0 - 0.5 * (a + b);
    }
    hi = lo;
  }
  return 1.0;
}

Phase classify_phase(const ActivationSpec& act, const InitHyper& h, const PhaseOptions& opts) {
  h.validate();
  if (!(opts.eoc_tolerance > 0.0)) throw DomainError("classify_phase: tolerance must be > 0");
  if (opts.horizon < 2) throw DomainError("classify_phase: horizon must be >= 2");
  const QuadratureSpec& quad = opts.quad;
  Phase ph;
  const FixedPointResult fp = fixed_point_variance(act, h, quad, opts.fixed_point);
  ph.fate = fp.fate;
  ph.q_star = fp.q_star;

  const bool converged = fp.fate == VarianceFate::Converges;
  double lambda_ref = fp.q_star;
  if (converged) {
    // With a settled variance, c* is the stable root of the correlation map
    // at q*.
    ph.c_star = solve_c_star(act, h, fp.q_star, quad);
  } else {
    // Otherwise follow a correlation trace, stopped early once 1 - c settles
    // or the variance leaves the admissible range. The pair starts at
    // c = 1/2 rather than 0: for odd activations without bias c = 0 is itself
    // a (possibly unstable) fixed point that an exact iteration never leaves.
    LayerStats last = LayerStats::from_lambda_q(0, 1.0, 0.5);
    bool settled = false;
    for (int l = 0; l < opts.horizon; ++l) {
      const LayerStats next = step_mf(act, h, last, quad);
      if (!next.finite || next.lambda > kDivergenceThreshold || next.lambda < kCollapseThreshold)
        break;
      const bool small_step =
          std::abs(next.sd2 / next.lambda - last.sd2 / last.lambda) < opts.c_settled;
      last = next;
      if (small_step) {
        settled = true;
        break;
      }
    }
    lambda_ref = last.lambda;
    ph.c_star = settled ? last.c : solve_c_star(act, h, lambda_ref, quad);
  }
  ph.chi_limit = chi_tilde(act, h, lambda_ref, quad);

  const bool at_unit = std::abs(ph.chi_limit - 1.0) < opts.eoc_tolerance;
  const bool c_is_one = 1.0 - ph.c_star < opts.unit_tolerance;
  if (at_unit) {
    if (converged) {
      ph.label = PhaseLabel::TransientDeepPrejudice;
      return ph;
    }
    // Critical chi without a settled variance: fall back on the variance fate.
    ph.ambiguous = true;
    ph.label = fp.fate == VarianceFate::Diverges ? PhaseLabel::ChaoticDeepPrejudice
                                                 : PhaseLabel::OrderedDeepPrejudice;
    return ph;
  }
  if (ph.chi_limit < 1.0) {
    ph.label = PhaseLabel::OrderedDeepPrejudice;
    ph.ambiguous = !c_is_one;
    return ph;
  }
  if (c_is_one) {
    ph.label = PhaseLabel::ChaoticDeepPrejudice;
  } else if (ph.c_star > 0.5) {
    ph.label = PhaseLabel::ChaoticPrejudice;
  } else {
    ph.label = PhaseLabel::ChaoticNeutrality;
  }
  if (std::abs(ph.c_star - 0.5) < opts.boundary_tolerance) ph.ambiguous = true;
  return ph;
}

// ---- gradients -------------------------------------------------------------

std::vector<double> gradient_profile(const ActivationSpec& act, const InitHyper& h, int depth,
                                     const QuadratureSpec& quad, double lambda0) {
  h.validate();
  if (depth < 1) throw DomainError("gradient_profile: depth must be >= 1");
  std::vector<double> lambdas(static_cast<std::size_t>(depth) + 1);
  lambdas[0] = lambda0;
  for (int l = 0; l < depth; ++l) {
    const double next = variance_map(act, h, lambdas[l], quad);
    lambdas[l + 1] = std::isfinite(next) ? next : lambdas[l];
  }
  std::vector<double> profile(static_cast<std::size_t>(depth) + 1, 1.0);
  for (int l = depth - 1; l >= 0; --l)
    profile[l] = profile[l + 1] * chi_tilde(act, h, lambdas[l], quad);
  return profile;
}

}  // namespace critnet
