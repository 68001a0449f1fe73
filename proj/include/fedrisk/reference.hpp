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

// Per-user reference profiles and the assembly of similarity vectors from a
// session's observations.

#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "fedrisk/dtw.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

struct SequenceReference {
  std::vector<Sequence> references;
  Sequence centroid;  // empty in top-k mode
};

// monostate: nothing usable was enrolled for the feature.
using ReferenceValue =
    std::variant<std::monostate, std::string, std::vector<double>,
                 SequenceReference, StringSet, GeoPoint, double>;

struct FeatureReference {
  FeatureSpec spec;
  ReferenceValue value;
  double max_dtw = 0.0;  // sequence features only
};

struct ReferenceConfig {
  std::size_t radius = 10;
  int dba_iterations = 10;
  // Scale used when the enrolled sequences show no spread at all.
  double default_dtw_scale = 1.0;
  // Precomputed max DTW per feature id; skips the pairwise scan.
  std::map<std::string, double> max_dtw_override;
};

struct UserReference {
  std::string user_id;
  std::vector<FeatureReference> features;  // schema order
  std::size_t radius = 10;

  FeatureSchema schema() const {
    FeatureSchema s;
    for (const auto& f : features) s.push_back(f.spec);
    return s;
  }
};

using SessionObservations = std::vector<FeatureObservation>;

namespace reference_detail {

inline const FeatureObservation* find_observation(
    const SessionObservations& session, const std::string& id) {
  for (const auto& o : session) {
    if (o.feature_id == id) return &o;
  }
  return nullptr;
}

inline double decayed_scalar(std::span<const double> values, double alpha) {
  double c = values.front();
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double hist[] = {c};
    const double live[] = {values[i]};
    c = decay_update(hist, live, alpha)[0];
  }
  return c;
}

// Decayed mean of hours on the 24h circle.
inline double decayed_hour(std::span<const double> hours, double alpha) {
  constexpr double kToRad = 2.0 * std::numbers::pi / 24.0;
  std::vector<double> c = {std::cos(hours.front() * kToRad),
                           std::sin(hours.front() * kToRad)};
  for (std::size_t i = 1; i < hours.size(); ++i) {
    const std::vector<double> live = {std::cos(hours[i] * kToRad),
                                      std::sin(hours[i] * kToRad)};
    c = decay_update(c, live, alpha);
  }
  double h = std::atan2(c[1], c[0]) / kToRad;
  if (h < 0.0) h += 24.0;
  return h;
}

inline ReferenceValue build_value(const FeatureSpec& spec,
                                  std::span<const FeatureObservation* const> obs,
                                  const ReferenceConfig& cfg,
                                  double* max_dtw) {
  switch (spec.kind) {
    case FeatureKind::kBinary: {
      std::map<std::string, int> counts;
      for (const auto* o : obs) ++counts[std::get<std::string>(o->payload)];
      auto best = counts.begin();
      for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
      }
      return best->first;
    }
    case FeatureKind::kVector: {
      std::vector<double> c = std::get<std::vector<double>>(obs[0]->payload);
      for (std::size_t i = 1; i < obs.size(); ++i) {
        c = decay_update(c, std::get<std::vector<double>>(obs[i]->payload),
                         spec.decay_alpha);
      }
      return c;
    }
    case FeatureKind::kSequence: {
      SequenceReference ref;
      for (const auto* o : obs) ref.references.push_back(std::get<Sequence>(o->payload));
      if (auto it = cfg.max_dtw_override.find(spec.id);
          it != cfg.max_dtw_override.end()) {
        *max_dtw = it->second;
      } else {
        *max_dtw = max_dtw_distance(ref.references, cfg.radius,
                                    cfg.default_dtw_scale);
      }
      if (spec.sequence_mode == SequenceMode::kCentroid) {
        ref.centroid = dba_centroid(ref.references, cfg.dba_iterations);
      }
      return ref;
    }
    case FeatureKind::kSetMember: {
      StringSet s;
      for (const auto* o : obs) s.insert(std::get<std::string>(o->payload));
      return s;
    }
    case FeatureKind::kGeo: {
      const auto& first = std::get<GeoPoint>(obs[0]->payload);
      std::vector<double> c = {first.lat_rad, first.lon_rad};
      for (std::size_t i = 1; i < obs.size(); ++i) {
        const auto& p = std::get<GeoPoint>(obs[i]->payload);
        c = decay_update(c, std::vector<double>{p.lat_rad, p.lon_rad},
                         spec.decay_alpha);
      }
      return GeoPoint{c[0], c[1]};
    }
    case FeatureKind::kVersion:
    case FeatureKind::kScalar: {
      std::vector<double> values;
      for (const auto* o : obs) values.push_back(std::get<double>(o->payload));
      if (spec.kind == FeatureKind::kScalar &&
          spec.scalar_metric == ScalarMetric::kCircular24h) {
        return decayed_hour(values, spec.decay_alpha);
      }
      return decayed_scalar(values, spec.decay_alpha);
    }
    case FeatureKind::kCategorySet: {
      // Baseline: items present in at least half of the enrolled sessions.
      std::map<std::string, std::size_t> counts;
      for (const auto* o : obs) {
        for (const auto& item : std::get<StringSet>(o->payload)) ++counts[item];
      }
      StringSet baseline;
      for (const auto& [item, n] : counts) {
        if (2 * n >= obs.size()) baseline.insert(item);
      }
      return baseline;
    }
  }
  return std::monostate{};
}

inline std::vector<double> score_feature(const FeatureReference& ref,
                                         const FeatureObservation& obs,
                                         std::size_t radius) {
  const FeatureSpec& spec = ref.spec;
  if (std::holds_alternative<std::monostate>(ref.value)) {
    return std::vector<double>(spec.width(), 0.0);
  }
  switch (spec.kind) {
    case FeatureKind::kBinary:
      return {sim_binary(std::get<std::string>(ref.value),
                         std::get<std::string>(obs.payload))};
    case FeatureKind::kVector:
      return {sim_cosine(std::get<std::vector<double>>(ref.value),
                         std::get<std::vector<double>>(obs.payload))};
    case FeatureKind::kSequence: {
      const auto& seq_ref = std::get<SequenceReference>(ref.value);
      const auto& live = std::get<Sequence>(obs.payload);
      if (spec.sequence_mode == SequenceMode::kTopK) {
        return sim_topk(live, seq_ref.references, spec.top_k, ref.max_dtw,
                        radius);
      }
      return {sim_sequence(live, seq_ref.centroid, ref.max_dtw, radius)};
    }
    case FeatureKind::kSetMember:
      return {sim_set_member(std::get<std::string>(obs.payload),
                             std::get<StringSet>(ref.value))};
    case FeatureKind::kGeo:
      return {sim_distance_normalized(
          haversine(std::get<GeoPoint>(ref.value),
                    std::get<GeoPoint>(obs.payload)),
          spec.max_distance)};
    case FeatureKind::kVersion:
      return {sim_version(std::get<double>(ref.value),
                          std::get<double>(obs.payload))};
    case FeatureKind::kCategorySet:
      return {sim_jaccard(std::get<StringSet>(ref.value),
                          std::get<StringSet>(obs.payload))};
    case FeatureKind::kScalar: {
      const double a = std::get<double>(ref.value);
      const double b = std::get<double>(obs.payload);
      const double d = spec.scalar_metric == ScalarMetric::kCircular24h
                           ? circular_hour_distance(a, b)
                           : std::abs(a - b);
      return {sim_distance_normalized(d, spec.max_distance)};
    }
  }
  return std::vector<double>(spec.width(), 0.0);
}

}  // namespace reference_detail

// Builds a user's reference profile from enrollment sessions in
// chronological order. Centroid-style features are folded in with the
// feature's decay factor, so later sessions weigh more when alpha < 1.
inline UserReference build_reference(
    const std::string& user_id, const FeatureSchema& schema,
    std::span<const SessionObservations> sessions,
    const ReferenceConfig& cfg = {}) {
  UserReference ref;
  ref.user_id = user_id;
  ref.radius = cfg.radius;
  for (const auto& spec : schema) {
    if (!(spec.decay_alpha >= 0.0 && spec.decay_alpha <= 1.0)) {
      fail(ErrorCode::kAlphaOutOfRange, "feature '" + spec.id + "'");
    }
    std::vector<const FeatureObservation*> obs;
    for (const auto& session : sessions) {
      const auto* o = reference_detail::find_observation(session, spec.id);
      if (o == nullptr || o->missing) continue;
      if (o->kind != spec.kind) {
        fail(ErrorCode::kInvalidArgument,
             "feature '" + spec.id + "': kind mismatch");
      }
      validate_observation(*o);
      obs.push_back(o);
    }
    FeatureReference fr;
    fr.spec = spec;
    if (!obs.empty()) {
      try {
        fr.value = reference_detail::build_value(spec, obs, cfg, &fr.max_dtw);
      } catch (const Error& e) {
        throw Error(e.code(), "feature '" + spec.id + "': " + e.what());
      }
    }
    ref.features.push_back(std::move(fr));
  }
  return ref;
}

// One score per coordinate, in the reference's declared feature order.
// Features without an observation, with a missing value, or with nothing
// enrolled score 0. Observation order does not matter.
inline SimilarityVector assemble_similarity_vector(
    const std::string& session_id, const SessionObservations& observations,
    const UserReference& reference,
    const UserReference* population = nullptr) {
  std::unordered_map<std::string, const FeatureObservation*> by_id;
  for (const auto& o : observations) {
    if (!by_id.emplace(o.feature_id, &o).second) {
      fail(ErrorCode::kInvalidArgument,
           "duplicate observation for feature '" + o.feature_id + "'");
    }
  }
  for (const auto& [id, o] : by_id) {
    bool known = false;
    for (const auto& f : reference.features) known = known || f.spec.id == id;
    if (!known) fail(ErrorCode::kUnknownFeature, "feature '" + id + "'");
  }

  SimilarityVector out;
  out.user_id = reference.user_id;
  out.session_id = session_id;
  out.feature_ids = coordinate_ids(reference.schema());
  for (std::size_t f = 0; f < reference.features.size(); ++f) {
    const FeatureReference* ref = &reference.features[f];
    const auto it = by_id.find(ref->spec.id);
    if (it == by_id.end() || it->second->missing) {
      out.scores.insert(out.scores.end(), ref->spec.width(), 0.0);
      continue;
    }
    const FeatureObservation& obs = *it->second;
    if (obs.kind != ref->spec.kind) {
      fail(ErrorCode::kInvalidArgument,
           "feature '" + obs.feature_id + "': kind mismatch");
    }
    if (obs.population_baseline && population != nullptr &&
        f < population->features.size() &&
        population->features[f].spec.id == ref->spec.id) {
      ref = &population->features[f];
    }
    try {
      validate_observation(obs);
      const auto scores =
          reference_detail::score_feature(*ref, obs, reference.radius);
      out.scores.insert(out.scores.end(), scores.begin(), scores.end());
    } catch (const Error& e) {
      throw Error(e.code(), "feature '" + obs.feature_id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace fedrisk
