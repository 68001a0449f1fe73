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

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

// Per-coordinate min-max bounds fitted on training vectors.
struct ScalingParams {
  std::vector<double> min;
  std::vector<double> max;

  bool fitted() const { return !min.empty() && min.size() == max.size(); }
  std::size_t dim() const { return min.size(); }
  bool degenerate(std::size_t i) const { return max.at(i) == min.at(i); }
};

inline ScalingParams fit_scaling(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) fail(ErrorCode::kInsufficientSamples, "no vectors to fit scaling on");
  ScalingParams p;
  p.min = vectors.front();
  p.max = vectors.front();
  if (p.min.empty()) fail(ErrorCode::kInvalidArgument, "zero-dimensional vectors");
  for (const auto& v : vectors) {
    check_same_dim(v.size(), p.min.size(), "fit_scaling");
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v[i])) fail(ErrorCode::kNonFiniteInput, "fit_scaling");
      p.min[i] = std::min(p.min[i], v[i]);
      p.max[i] = std::max(p.max[i], v[i]);
    }
  }
  return p;
}

inline ScalingParams fit_scaling(std::span<const SimilarityVector> vectors) {
  std::vector<std::vector<double>> xs;
  xs.reserve(vectors.size());
  for (const auto& v : vectors) xs.push_back(v.scores);
  return fit_scaling(xs);
}

// (x - min) / (max - min) clamped to [0, 1]; degenerate coordinates map to 0.5.
inline std::vector<double> apply_scaling(const ScalingParams& p,
                                         std::span<const double> x) {
  if (!p.fitted()) fail(ErrorCode::kUnfittedParams, "scaling parameters are not fitted");
  if (x.size() != p.dim()) {
    fail(ErrorCode::kUnfittedParams, "scaling fitted for dimension " +
                                         std::to_string(p.dim()) + ", got " +
                                         std::to_string(x.size()));
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = p.degenerate(i) ? 0.5 : clamp01((x[i] - p.min[i]) / (p.max[i] - p.min[i]));
  }
  return out;
}

inline SimilarityVector apply_scaling(const ScalingParams& p, SimilarityVector v) {
  v.scores = apply_scaling(p, v.scores);
  return v;
}

}  // namespace fedrisk
