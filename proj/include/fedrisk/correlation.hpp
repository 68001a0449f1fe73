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

// Empirical cross-group dependence of similarity coordinates.
//
// For a partition of the features into m semantic groups, the score of a
// group pair (a, b) is the mean absolute Pearson correlation over all
// coordinate pairs i in a, j in b. eps_avg is the largest pair score, and
// the reported bound is m(m-1)/2 * eps_avg with the unspecified absolute
// constant taken as 1.

#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"

namespace fedrisk {

using FeatureGroups = std::vector<std::vector<std::string>>;

struct CorrelationDiagnostic {
  double eps_avg = 0.0;
  double bound = 0.0;
  double bound_constant = 1.0;
  // pair_mean[a][b] for a != b; NaN when either group has no usable column.
  std::vector<std::vector<double>> pair_mean;
  std::size_t worst_a = 0;
  std::size_t worst_b = 0;
  // Constant coordinates, excluded from every correlation.
  std::vector<std::string> degenerate;
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return sxy / std::sqrt(sxx * syy);
}

inline CorrelationDiagnostic cross_group_correlation(
    std::span<const SimilarityVector> vectors, const FeatureGroups& groups) {
  if (groups.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "need at least 2 groups");
  }
  if (vectors.size() < 3) {
    fail(ErrorCode::kInsufficientSamples,
         "need at least 3 vectors, got " + std::to_string(vectors.size()));
  }
  const auto& ids = vectors.front().feature_ids;
  std::map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < ids.size(); ++c) column_of[ids[c]] = c;
  for (const auto& v : vectors) {
    if (v.feature_ids != ids) {
      fail(ErrorCode::kFeatureMismatch, "vectors disagree on feature ids");
    }
    check_same_dim(v.scores.size(), ids.size(), "similarity vector");
  }

  std::set<std::string> assigned;
  for (const auto& g : groups) {
    for (const auto& id : g) {
      if (!column_of.contains(id)) {
        fail(ErrorCode::kUnknownFeature, "group member '" + id + "'");
      }
      if (!assigned.insert(id).second) {
        fail(ErrorCode::kInvalidArgument,
             "feature '" + id + "' is assigned to more than one group");
      }
    }
  }
  if (assigned.size() != ids.size()) {
    fail(ErrorCode::kInvalidArgument, "every feature must belong to a group");
  }

  // Columns, dropping the constant ones.
  std::vector<std::vector<double>> columns(ids.size());
  std::vector<bool> usable(ids.size());
  CorrelationDiagnostic out;
  for (std::size_t c = 0; c < ids.size(); ++c) {
    columns[c].reserve(vectors.size());
    for (const auto& v : vectors) columns[c].push_back(v.scores[c]);
    bool constant = true;
    for (double x : columns[c]) constant = constant && x == columns[c][0];
    usable[c] = !constant;
    if (constant) out.degenerate.push_back(ids[c]);
  }
  if (out.degenerate.size() == ids.size()) {
    fail(ErrorCode::kDegenerateAll, "every coordinate is constant");
  }

  const std::size_t m = groups.size();
  out.pair_mean.assign(m, std::vector<double>(m, std::nan("")));
  double worst = -1.0;
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& ia : groups[a]) {
        const std::size_t ca = column_of[ia];
        if (!usable[ca]) continue;
        for (const auto& ib : groups[b]) {
          const std::size_t cb = column_of[ib];
          if (!usable[cb]) continue;
          sum += std::abs(pearson(columns[ca], columns[cb]));
          ++count;
        }
      }
      if (count == 0) continue;
      const double mean = sum / static_cast<double>(count);
      out.pair_mean[a][b] = out.pair_mean[b][a] = mean;
      if (mean > worst) {
        worst = mean;
        out.worst_a = a;
        out.worst_b = b;
      }
    }
  }
  out.eps_avg = worst < 0.0 ? 0.0 : worst;
  out.bound = out.bound_constant * static_cast<double>(m * (m - 1)) / 2.0 *
              out.eps_avg;
  return out;
}

}  // namespace fedrisk
