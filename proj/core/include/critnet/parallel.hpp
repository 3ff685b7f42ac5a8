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

#include <cstddef>
#include <functional>

namespace critnet {

// Worker count: `requested` if positive, else the CRITNET_THREADS environment
// variable if it holds a positive integer, else the hardware concurrency.
int resolve_threads(int requested = 0);

// Calls body(i) for i in [0, n) on up to `threads` worker threads. Indices are
// handed out dynamically; the first exception thrown by any call is rethrown
// after all workers have stopped. Results must be written to per-index slots
// so that the outcome does not depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace critnet
