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

// Unsupervised risk pseudo-labels: Lloyd's k-means over similarity vectors,
// then clusters ranked by centroid norm. Similarities are "larger is more
// legitimate", so the cluster nearest the origin is the riskiest.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

// Ordered from the strictest level down.
enum class RiskLevel : int { kHigh = 0, kMedium = 1, kLow = 2 };

constexpr std::string_view risk_level_name(RiskLevel r) {
  switch (r) {
    case RiskLevel::kHigh: return "high";
    case RiskLevel::kMedium: return "medium";
    case RiskLevel::kLow: return "low";
  }
  return "unknown";
}

inline RiskLevel parse_risk_level(std::string_view s) {
  if (s == "high") return RiskLevel::kHigh;
  if (s == "medium") return RiskLevel::kMedium;
  if (s == "low") return RiskLevel::kLow;
  fail(ErrorCode::kInvalidArgument, "unknown risk level '" + std::string(s) + "'");
}

// The risk levels used for k clusters: {High, Low} or {High, Medium, Low}.
inline std::vector<RiskLevel> risk_levels_for(int k) {
  if (k == 2) return {RiskLevel::kHigh, RiskLevel::kLow};
  if (k == 3) return {RiskLevel::kHigh, RiskLevel::kMedium, RiskLevel::kLow};
  fail(ErrorCode::kInvalidArgument, "k must be 2 or 3, got " + std::to_string(k));
}

struct KMeansOptions {
  int max_iter = 100;
  double tolerance = 1e-6;  // max-norm centroid shift
  int max_reseeds = 3;
};

struct ClusterModel {
  int k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<int> assignments;  // per input vector
  // Indexed by cluster; filled by rank_risk.
  std::vector<RiskLevel> risk_of_cluster;
  bool tie_break_applied = false;
  // Within-cluster sum of squares after each Lloyd iteration.
  std::vector<double> sse_trace;
  int iterations = 0;
};

inline double squared_distance(std::span<const double> a,
                               std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace kmeans_detail {

inline int nearest(std::span<const double> x,
                   const std::vector<std::vector<double>>& centroids,
                   double* dist = nullptr) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(x, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

inline double sse(std::span<const std::vector<double>> xs,
                  const std::vector<std::vector<double>>& centroids,
                  const std::vector<int>& assign) {
  double s = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    s += squared_distance(xs[i], centroids[static_cast<std::size_t>(assign[i])]);
  }
  return s;
}

// Farthest-point seeding over the distinct points in lexicographic order.
// The seed picks the first center; each next center is the point farthest
// from its nearest chosen center. Input order and duplicates do not matter.
inline std::vector<std::vector<double>> seed_centroids(
    std::span<const std::vector<double>> xs, int k, std::uint64_t seed) {
  std::vector<std::vector<double>> distinct(xs.begin(), xs.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < static_cast<std::size_t>(k)) {
    fail(ErrorCode::kDegenerateClustering,
         "only " + std::to_string(distinct.size()) +
             " distinct points for k=" + std::to_string(k));
  }
  std::vector<std::vector<double>> centroids;
  centroids.push_back(distinct[seed % distinct.size()]);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    std::size_t far = 0;
    double far_d = -1.0;
    for (std::size_t i = 0; i < distinct.size(); ++i) {
      double d = 0.0;
      nearest(distinct[i], centroids, &d);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    centroids.push_back(distinct[far]);
  }
  return centroids;
}

}  // namespace kmeans_detail

inline ClusterModel kmeans(std::span<const std::vector<double>> vectors, int k,
                           std::uint64_t seed, const KMeansOptions& opt = {}) {
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be positive");
  if (vectors.size() < static_cast<std::size_t>(k)) {
    fail(ErrorCode::kTooFewSamples, std::to_string(vectors.size()) +
                                        " samples for k=" + std::to_string(k));
  }
  const std::size_t dim = vectors.front().size();
  for (const auto& v : vectors) check_same_dim(v.size(), dim, "kmeans input");

  ClusterModel model;
  model.k = k;
  model.centroids = kmeans_detail::seed_centroids(vectors, k, seed);
  model.assignments.assign(vectors.size(), 0);
  int reseeds = 0;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      model.assignments[i] = kmeans_detail::nearest(vectors[i], model.centroids);
    }
    std::vector<std::vector<double>> sums(static_cast<std::size_t>(k),
                                          std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      const auto c = static_cast<std::size_t>(model.assignments[i]);
      for (std::size_t d = 0; d < dim; ++d) sums[c][d] += vectors[i][d];
      ++counts[c];
    }
    bool reseeded = false;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] > 0) continue;
      if (++reseeds > opt.max_reseeds) {
        fail(ErrorCode::kEmptyClusterUnrecoverable,
             "cluster " + std::to_string(c) + " stayed empty");
      }
      // Move the empty cluster onto the worst-served point.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < vectors.size(); ++i) {
        const double d = squared_distance(
            vectors[i],
            model.centroids[static_cast<std::size_t>(model.assignments[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      model.centroids[c] = vectors[far];
      reseeded = true;
    }
    if (reseeded) continue;

    double shift = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double v = sums[c][d] / static_cast<double>(counts[c]);
        shift = std::max(shift, std::abs(v - model.centroids[c][d]));
        model.centroids[c][d] = v;
      }
    }
    model.iterations = iter + 1;
    model.sse_trace.push_back(
        kmeans_detail::sse(vectors, model.centroids, model.assignments));
    if (shift < opt.tolerance) break;
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    model.assignments[i] = kmeans_detail::nearest(vectors[i], model.centroids);
  }
  for (std::size_t a = 0; a < model.centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < model.centroids.size(); ++b) {
      if (model.centroids[a] == model.centroids[b]) {
        fail(ErrorCode::kDegenerateClustering, "coincident centroids");
      }
    }
  }
  return model;
}

inline constexpr double kNormTieTolerance = 1e-9;

// Smallest centroid norm -> High, largest -> Low, the middle one (k=3) ->
// Medium. Norms within kNormTieTolerance are ordered by the lexicographically
// smaller centroid first, and tie_break_applied is set.
inline ClusterModel rank_risk(ClusterModel model) {
  const auto levels = risk_levels_for(model.k);
  std::vector<std::size_t> order(model.centroids.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> norms;
  for (const auto& c : model.centroids) norms.push_back(norm2(c));
  bool tie = false;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(norms[a] - norms[b]) <= kNormTieTolerance) {
      if (a != b) tie = true;
      return model.centroids[a] < model.centroids[b];
    }
    return norms[a] < norms[b];
  });
  model.tie_break_applied = tie;
  model.risk_of_cluster.assign(model.centroids.size(), RiskLevel::kLow);
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    model.risk_of_cluster[order[rank]] = levels[rank];
  }
  return model;
}

struct SessionLabel {
  std::string session_id;
  RiskLevel risk = RiskLevel::kHigh;

  friend bool operator==(const SessionLabel&, const SessionLabel&) = default;
};

struct LabelingResult {
  std::vector<SessionLabel> labels;  // input order
  ClusterModel model;                // clustered in session-id order
};

// Clusters the sessions (canonicalized by session id, so the input order is
// irrelevant) and labels each one with its cluster's risk level.
inline LabelingResult label_sessions(std::span<const SimilarityVector> vectors,
                                     int k, std::uint64_t seed,
                                     const KMeansOptions& opt = {}) {
  risk_levels_for(k);
  std::vector<std::size_t> order(vectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vectors[a].session_id < vectors[b].session_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (vectors[order[i]].session_id == vectors[order[i - 1]].session_id) {
      fail(ErrorCode::kInvalidArgument,
           "duplicate session id '" + vectors[order[i]].session_id + "'");
    }
  }
  std::vector<std::vector<double>> points;
  points.reserve(vectors.size());
  for (std::size_t idx : order) points.push_back(vectors[idx].scores);

  LabelingResult out;
  out.model = rank_risk(kmeans(points, k, seed, opt));
  out.labels.resize(vectors.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t idx = order[pos];
    const auto cluster = static_cast<std::size_t>(out.model.assignments[pos]);
    out.labels[idx] = {vectors[idx].session_id,
                       out.model.risk_of_cluster[cluster]};
  }
  return out;
}

}  // namespace fedrisk
