// Copyright 2026 The FedRisk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only DTW oracle: walks every monotone warping path explicitly, with no
// dynamic programming, and keeps the cheapest.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace fedrisk::testing {

inline void enumerate_paths(const std::vector<double>& a,
                            const std::vector<double>& b, std::size_t i,
                            std::size_t j, double cost, double* best) {
  cost += std::abs(a[i] - b[j]);
  if (i + 1 == a.size() && j + 1 == b.size()) {
    if (cost < *best) *best = cost;
    return;
  }
  if (i + 1 < a.size()) enumerate_paths(a, b, i + 1, j, cost, best);
  if (j + 1 < b.size()) enumerate_paths(a, b, i, j + 1, cost, best);
  if (i + 1 < a.size() && j + 1 < b.size()) {
    enumerate_paths(a, b, i + 1, j + 1, cost, best);
  }
}

inline double brute_force_dtw(const std::vector<double>& a,
                              const std::vector<double>& b) {
  double best = std::numeric_limits<double>::infinity();
  enumerate_paths(a, b, 0, 0, 0.0, &best);
  return best;
}

}  // namespace fedrisk::testing
