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

namespace critnet {

// Control parameters of the phase diagram: weight and bias variances.
struct InitHyper {
  double sigma_w2 = 1.0;
  double sigma_b2 = 0.0;

  void validate() const;  // throws DomainError
};

// Long-depth behaviour of the signal variance. NonConvergent marks an
// iteration that neither settles nor leaves the admissible range.
enum class VarianceFate { Converges, Diverges, Collapses, NonConvergent };

// State in data/centres coordinates: the within-node variance over the data
// and the across-node variance of the node centres.
struct IgbState {
  double sd2 = 1.0;
  double sc2 = 0.0;
};

std::string to_string(VarianceFate fate);

}  // namespace critnet
