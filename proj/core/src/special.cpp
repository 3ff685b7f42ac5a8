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

#include "critnet/special.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include <boost/math/special_functions/erf.hpp>

namespace critnet {

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace {

// Gauss-Legendre half rules (negative abscissae) for 6, 12 and 20 points.
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384,
                                       0.4679139345726904};
constexpr std::array<double, 3> kX6 = {-0.9324695142031522, -0.6612093864662647,
                                       -0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.4717533638651177e-1, 0.1069393259953183,
                                        0.1600783285433464,    0.2031674267230659,
                                        0.2334925365383547,    0.2491470458134029};
constexpr std::array<double, 6> kX12 = {-0.9815606342467191, -0.9041172563704750,
                                        -0.7699026741943050, -0.5873179542866171,
                                        -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 10> kW20 = {
    0.1761400713915212e-1, 0.4060142980038694e-1, 0.6267204833410906e-1,
    0.8327674157670475e-1, 0.1019301198172404,    0.1181945319615184,
    0.1316886384491766,    0.1420961093183821,    0.1491729864726037,
    0.1527533871307259};
constexpr std::array<double, 10> kX20 = {
    -0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
    -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
    -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
    -0.7652652113349733e-1};

// Upper orthant probability P(X > dh, Y > dk) with correlation r.
double bvnd(double dh, double dk, double r) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double* w;
  const double* x;
  int lg;
  if (std::abs(r) < 0.3) {
    w = kW6.data(); x = kX6.data(); lg = 3;
  } else if (std::abs(r) < 0.75) {
    w = kW12.data(); x = kX12.data(); lg = 6;
  } else {
    w = kW20.data(); x = kX20.data(); lg = 10;
  }
  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r);
    for (int i = 0; i < lg; ++i) {
      double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-x[i] + 1.0) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + normal_cdf(-h) * normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      double xs = (a * (x[i] + 1.0)) * (a * (x[i] + 1.0));
      double rs = std::sqrt(1.0 - xs);
      bvn += a * w[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (-x[i] + 1.0) * (-x[i] + 1.0) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
              (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) bvn += normal_cdf(-std::max(h, k));
  if (r < 0.0) bvn = -bvn + std::max(0.0, normal_cdf(-h) - normal_cdf(-k));
  return bvn;
}

}  // namespace

double bivariate_normal_cdf(double x, double y, double r) {
  if (r >= 1.0) return normal_cdf(std::min(x, y));
  if (r <= -1.0) return std::max(0.0, normal_cdf(x) - normal_cdf(-y));
  if (x == -std::numeric_limits<double>::infinity() ||
      y == -std::numeric_limits<double>::infinity())
    return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return normal_cdf(y);
  if (y == std::numeric_limits<double>::infinity()) return normal_cdf(x);
  const double p = bvnd(-x, -y, r);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace critnet
