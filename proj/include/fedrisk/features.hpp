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

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedrisk/dtw.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

enum class FeatureKind {
  kBinary,       // exact token match
  kVector,       // cosine similarity
  kSequence,     // DTW against a centroid or the top-k references
  kSetMember,    // live value in the set of enrolled values
  kGeo,          // haversine distance to a location centroid
  kVersion,      // version drift
  kCategorySet,  // Jaccard overlap
  kScalar,       // normalized distance to a historical centroid
};

constexpr std::string_view feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kBinary: return "binary";
    case FeatureKind::kVector: return "vector";
    case FeatureKind::kSequence: return "sequence";
    case FeatureKind::kSetMember: return "set_member";
    case FeatureKind::kGeo: return "geo";
    case FeatureKind::kVersion: return "version";
    case FeatureKind::kCategorySet: return "category_set";
    case FeatureKind::kScalar: return "scalar";
  }
  return "unknown";
}

// Binary and SetMember carry a string, Version and Scalar a double.
using FeaturePayload = std::variant<std::string, std::vector<double>, Sequence,
                                    GeoPoint, double, StringSet>;

struct FeatureObservation {
  std::string feature_id;
  FeatureKind kind = FeatureKind::kScalar;
  FeaturePayload payload;
  // The value could not be observed (unknown IP, unparseable user agent...).
  bool missing = false;
  // Compare against the population reference instead of the user's own.
  bool population_baseline = false;

  static FeatureObservation absent(std::string id, FeatureKind kind) {
    FeatureObservation o;
    o.feature_id = std::move(id);
    o.kind = kind;
    o.missing = true;
    return o;
  }
};

inline bool payload_matches_kind(const FeatureObservation& o) {
  if (o.missing) return true;
  switch (o.kind) {
    case FeatureKind::kBinary:
    case FeatureKind::kSetMember:
      return std::holds_alternative<std::string>(o.payload);
    case FeatureKind::kVector:
      return std::holds_alternative<std::vector<double>>(o.payload);
    case FeatureKind::kSequence:
      return std::holds_alternative<Sequence>(o.payload);
    case FeatureKind::kGeo:
      return std::holds_alternative<GeoPoint>(o.payload);
    case FeatureKind::kVersion:
    case FeatureKind::kScalar:
      return std::holds_alternative<double>(o.payload);
    case FeatureKind::kCategorySet:
      return std::holds_alternative<StringSet>(o.payload);
  }
  return false;
}

inline void validate_observation(const FeatureObservation& o) {
  if (!payload_matches_kind(o)) {
    fail(ErrorCode::kInvalidArgument,
         "feature '" + o.feature_id + "': payload does not match kind " +
             std::string(feature_kind_name(o.kind)));
  }
  if (o.missing) return;
  if (o.kind == FeatureKind::kGeo) check_geo(std::get<GeoPoint>(o.payload));
  if (o.kind == FeatureKind::kSequence) {
    sequence_dim(std::get<Sequence>(o.payload));
  }
  if (o.kind == FeatureKind::kVersion && std::get<double>(o.payload) < 0.0) {
    fail(ErrorCode::kInvalidArgument,
         "feature '" + o.feature_id + "': negative version");
  }
}

enum class ScalarMetric { kLinear, kCircular24h };
enum class SequenceMode { kCentroid, kTopK };

// Static per-feature configuration, shared by every user of a modality.
struct FeatureSpec {
  std::string id;
  FeatureKind kind = FeatureKind::kScalar;
  double decay_alpha = 0.9;
  // Geo: kilometres. Scalar: same unit as the payload.
  double max_distance = 1.0;
  ScalarMetric scalar_metric = ScalarMetric::kLinear;
  SequenceMode sequence_mode = SequenceMode::kCentroid;
  std::size_t top_k = 5;

  // Number of similarity coordinates this feature contributes.
  std::size_t width() const {
    return kind == FeatureKind::kSequence &&
                   sequence_mode == SequenceMode::kTopK
               ? top_k
               : 1;
  }
};

using FeatureSchema = std::vector<FeatureSpec>;

// Coordinate names in declared order; top-k features expand to "id#1".."id#k".
inline std::vector<std::string> coordinate_ids(const FeatureSchema& schema) {
  std::vector<std::string> ids;
  for (const auto& spec : schema) {
    if (spec.width() == 1) {
      ids.push_back(spec.id);
    } else {
      for (std::size_t i = 1; i <= spec.width(); ++i) {
        ids.push_back(spec.id + "#" + std::to_string(i));
      }
    }
  }
  return ids;
}

struct SimilarityVector {
  std::string user_id;
  std::string session_id;
  std::vector<double> scores;
  std::vector<std::string> feature_ids;

  friend bool operator==(const SimilarityVector&,
                         const SimilarityVector&) = default;
};

}  // namespace fedrisk
