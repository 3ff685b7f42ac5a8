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

#include "critnet/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "critnet/errors.hpp"
#include "panel.hpp"

namespace critnet {

std::string to_string(QuadBackend backend) {
  return backend == QuadBackend::Hermite ? "hermite" : "truncated-panels";
}

QuadBackend quad_backend_from_string(const std::string& name) {
  if (name == "hermite") return QuadBackend::Hermite;
  if (name == "truncated-panels" || name == "panels") return QuadBackend::TruncatedPanels;
  throw DomainError("unknown quadrature backend '" + name +
                    "' (expected hermite or truncated-panels)");
}

QuadratureSpec QuadratureSpec::panels(int nodes, double radius) {
  QuadratureSpec spec;
  spec.backend = QuadBackend::TruncatedPanels;
  spec.node_count = nodes;
  spec.truncation_radius = radius;
  return spec;
}

QuadratureSpec QuadratureSpec::hermite(int nodes) {
  QuadratureSpec spec;
  spec.backend = QuadBackend::Hermite;
  spec.node_count = nodes;
  return spec;
}

QuadratureSpec QuadratureSpec::with_kinks(std::vector<double> kinks) const {
  QuadratureSpec out = *this;
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  out.kink_points = std::move(kinks);
  return out;
}

QuadratureSpec QuadratureSpec::with_smooth_points(std::vector<double> points) const {
  QuadratureSpec out = *this;
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  out.smooth_points = std::move(points);
  return out;
}

std::vector<double> QuadratureSpec::split_points() const {
  std::vector<double> p = kink_points;
  p.insert(p.end(), smooth_points.begin(), smooth_points.end());
  std::sort(p.begin(), p.end());
  return p;
}

void QuadratureSpec::validate() const {
  if (node_count < 2) throw DomainError("quadrature node_count must be >= 2");
  if (node_count > kMaxQuadNodes)
    throw DomainError("quadrature node_count must be <= " + std::to_string(kMaxQuadNodes));
  if (backend == QuadBackend::TruncatedPanels && !(truncation_radius >= 6.0))
    throw DomainError("quadrature truncation_radius must be >= 6");
  for (std::size_t i = 1; i < kink_points.size(); ++i) {
    if (!(kink_points[i] > kink_points[i - 1]))
      throw DomainError("quadrature kink_points must be strictly increasing");
  }
  for (double k : kink_points) {
    if (!std::isfinite(k)) throw DomainError("quadrature kink_points must be finite");
  }
  for (std::size_t i = 1; i < smooth_points.size(); ++i) {
    if (!(smooth_points[i] > smooth_points[i - 1]))
      throw DomainError("quadrature smooth_points must be strictly increasing");
  }
  for (double k : smooth_points) {
    if (!std::isfinite(k)) throw DomainError("quadrature smooth_points must be finite");
  }
}

Correlation Correlation::from_c(double c) {
  if (!(std::abs(c) <= 1.0)) throw DomainError("correlation must lie in [-1, 1]");
  Correlation out;
  out.c = c;
  out.s = std::sqrt((1.0 - c) * (1.0 + c));
  return out;
}

Correlation Correlation::from_one_minus_c(double one_minus_c) {
  if (!(one_minus_c >= 0.0 && one_minus_c <= 2.0))
    throw DomainError("1 - c must lie in [0, 2]");
  Correlation out;
  out.c = 1.0 - one_minus_c;
  out.s = std::sqrt(one_minus_c * (2.0 - one_minus_c));
  return out;
}

namespace {

GaussianRule compute_legendre(int n) {
  GaussianRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

// Probabilists' Gauss-Hermite rule. Starting values are the eigenvalues of
// the Jacobi matrix (Golub-Welsch), which stay reliable for any n; each node
// is then polished by Newton steps on the orthonormal physicists' Hermite
// recurrence. The recurrence is rescaled on the fly so that it cannot
// overflow at the outermost nodes of large rules, and the weights are formed
// in log space for the same reason.
GaussianRule compute_hermite(int n) {
  constexpr double kPim4 = 0.7511255444649425;  // pi^(-1/4)
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi, Eigen::EigenvaluesOnly);
  std::vector<double> x(n), log_w(n);
  for (int i = 0; i < n; ++i) {
    double z = eig.eigenvalues()[i];
    double pp = 0.0, log_scale = 0.0;
    for (int it = 0; it < 20; ++it) {
      double p1 = kPim4, p2 = 0.0;
      log_scale = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
        if (std::abs(p1) > 1e150) {
          p1 *= 1e-150;
          p2 *= 1e-150;
          log_scale += 150.0 * std::numbers::ln10;
        }
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i] = z;
    log_w[i] = std::log(2.0) - 2.0 * (std::log(std::abs(pp)) + log_scale);
  }
  GaussianRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * x[i];
    rule.weights[i] = std::exp(log_w[i]) * std::numbers::inv_sqrtpi;
  }
  // Symmetrise: the rule is exactly symmetric in exact arithmetic.
  for (int i = 0; i < n / 2; ++i) {
    const double node = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double weight = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -node;
    rule.nodes[n - 1 - i] = node;
    rule.weights[i] = rule.weights[n - 1 - i] = weight;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

GaussianRule compute_panels(const QuadratureSpec& spec) {
  const detail::PanelIntegrator integ(spec.node_count, spec.truncation_radius);
  std::vector<double> edges;
  detail::panel_edges(spec.split_points(), spec.truncation_radius, edges);
  const auto leg = legendre_rule(spec.node_count);
  GaussianRule rule;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    const double mid = 0.5 * (edges[p + 1] + edges[p]);
    for (std::size_t i = 0; i < leg->nodes.size(); ++i) {
      const double z = mid + half * leg->nodes[i];
      rule.nodes.push_back(z);
      rule.weights.push_back(half * leg->weights[i] * normal_pdf(z));
    }
  }
  return rule;
}

using RuleKey = std::tuple<int, int, double, std::vector<double>, std::vector<double>>;

}  // namespace

std::shared_ptr<const GaussianRule> legendre_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const GaussianRule>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto rule = std::make_shared<const GaussianRule>(compute_legendre(n));
  cache.emplace(n, rule);
  return rule;
}

std::shared_ptr<const GaussianRule> gaussian_rule(const QuadratureSpec& spec) {
  spec.validate();
  static std::mutex mutex;
  static std::map<RuleKey, std::shared_ptr<const GaussianRule>> cache;
  const bool hermite = spec.backend == QuadBackend::Hermite;
  RuleKey key{static_cast<int>(spec.backend), spec.node_count,
              hermite ? 0.0 : spec.truncation_radius,
              hermite ? std::vector<double>{} : spec.kink_points,
              hermite ? std::vector<double>{} : spec.smooth_points};
  {
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const GaussianRule>(hermite ? compute_hermite(spec.node_count)
                                                           : compute_panels(spec));
  std::lock_guard<std::mutex> lock(mutex);
  // Kink sets that scale with a variance can make the key space unbounded;
  // keep the cache from growing without limit.
  if (cache.size() > 4096) cache.clear();
  cache.emplace(std::move(key), rule);
  return rule;
}

double expect_g1(const std::function<double(double)>& f, const QuadratureSpec& spec) {
  const auto rule = gaussian_rule(spec);
  return detail::apply_rule(*rule, f);
}

double expect_g2(const std::function<double(double, double)>& f, double c,
                 const QuadratureSpec& spec) {
  if (!(std::abs(c) <= 1.0)) throw DomainError("expect_g2: correlation must lie in [-1, 1]");
  return expect_g2(f, Correlation::from_c(c), spec);
}

double expect_g2(const std::function<double(double, double)>& f, Correlation corr,
                 const QuadratureSpec& spec) {
  const double c = corr.c;
  const double s = corr.s;
  if (!(std::abs(c) <= 1.0) || !(s >= 0.0))
    throw DomainError("expect_g2: correlation must lie in [-1, 1]");
  spec.validate();

  if (s == 0.0) {
    if (c > 0.0) return expect_g1([&](double z) { return f(z, z); }, spec);
    std::vector<double> kinks = spec.kink_points;
    for (double k : spec.kink_points) kinks.push_back(-k);
    std::vector<double> smooth = spec.smooth_points;
    for (double k : spec.smooth_points) smooth.push_back(-k);
    return expect_g1([&](double z) { return f(z, -z); },
                     spec.with_kinks(kinks).with_smooth_points(smooth));
  }

  if (spec.backend == QuadBackend::Hermite) {
    const auto rule = gaussian_rule(spec);
    return detail::apply_rule(*rule, [&](double z) {
      return detail::apply_rule(*rule, [&](double zp) { return f(z, c * z + s * zp); });
    });
  }

  // Outer breakpoints: the kinks of the first argument, plus the places where
  // the second argument's kink crosses the inner domain (z = k / c). There the
  // inner average smooths the kink over a width s / |c|, which is resolved by
  // geometrically spaced extra panels.
  // Smooth points only need a split at the crossing itself.
  std::vector<double> outer = spec.split_points();
  if (c != 0.0) {
    const double width = s / std::abs(c);
    for (double k : spec.smooth_points) outer.push_back(k / c);
    for (double k : spec.kink_points) {
      const double centre = k / c;
      outer.push_back(centre);
      if (width < 2.0) {
        for (double m : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
          outer.push_back(centre - m * width);
          outer.push_back(centre + m * width);
        }
      }
    }
  }
  const detail::PanelIntegrator integ(spec.node_count, spec.truncation_radius);
  const std::vector<double> splits = spec.split_points();
  std::vector<double> inner(splits.size());
  return integ.integrate(outer, [&](double z) {
    for (std::size_t i = 0; i < splits.size(); ++i) inner[i] = (splits[i] - c * z) / s;
    const double cz = c * z;
    return integ.integrate(inner, [&](double zp) { return f(z, cz + s * zp); });
  });
}

double expect_gn(const std::function<double(std::span<const double>)>& f, int n,
                 const QuadratureSpec& spec, bool tie_line) {
  if (n < 1) throw DomainError("expect_gn: dimension must be positive");
  if (n > 2) throw Unsupported("expect_gn: only one- and two-dimensional windows are supported");
  spec.validate();
  if (n == 1) {
    return expect_g1(
        [&](double z) {
          const double x[1] = {z};
          return f(std::span<const double>(x, 1));
        },
        spec);
  }
  const auto rule = gaussian_rule(spec);
  if (spec.backend == QuadBackend::Hermite) {
    return detail::apply_rule(*rule, [&](double z1) {
      return detail::apply_rule(*rule, [&](double z2) {
        const double x[2] = {z1, z2};
        return f(std::span<const double>(x, 2));
      });
    });
  }
  const detail::PanelIntegrator integ(spec.node_count, spec.truncation_radius);
  std::vector<double> inner = spec.split_points();
  if (tie_line) inner.push_back(0.0);
  return detail::apply_rule(*rule, [&](double z1) {
    if (tie_line) inner.back() = z1;
    return integ.integrate(inner, [&](double z2) {
      const double x[2] = {z1, z2};
      return f(std::span<const double>(x, 2));
    });
  });
}

}  // namespace critnet
