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

// User exclusion rules, checked in order: min_events, low_variance,
// min_profiles. The first failing rule is the one reported.

#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedrisk/features.hpp"
#include "fedrisk/ingest/records.hpp"
#include "fedrisk/reference.hpp"

namespace fedrisk {

struct ExclusionConfig {
  std::size_t min_events = 2;
  double min_variance = 1e-4;
  // Distinct (ip, device, user agent) profiles; contextual users only.
  std::size_t min_profiles = 3;
};

struct Exclusion {
  std::string user_id;
  std::string rule;  // "min_events", "low_variance" or "min_profiles"
  std::string detail;
};

struct ExclusionReport {
  std::vector<std::string> retained;  // user id order
  std::vector<Exclusion> excluded;    // user id order
};

// Mean over coordinates of the population variance across vectors.
inline double mean_coordinate_variance(std::span<const std::vector<double>> vectors) {
  if (vectors.empty()) return 0.0;
  const std::size_t d = vectors.front().size();
  if (d == 0) return 0.0;
  const double n = static_cast<double>(vectors.size());
  double total = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (const auto& v : vectors) mean += v.at(j);
    mean /= n;
    double var = 0.0;
    for (const auto& v : vectors) var += (v[j] - mean) * (v[j] - mean);
    total += var / n;
  }
  return total / static_cast<double>(d);
}

// Each session scored against a reference enrolled from all of the user's
// sessions.
inline std::vector<std::vector<double>> in_sample_similarity(
    const std::string& user_id, std::span<const SessionRecord> records,
    const FeatureSchema& schema, const ReferenceConfig& cfg = {}) {
  std::vector<SessionObservations> sessions;
  for (const auto& r : records) sessions.push_back(r.observations);
  const UserReference ref = build_reference(user_id, schema, sessions, cfg);
  std::vector<std::vector<double>> out;
  for (const auto& r : records) {
    out.push_back(assemble_similarity_vector(r.session_id, r.observations, ref).scores);
  }
  return out;
}

// similarity(user_id, records) -> one similarity vector per record.
template <typename SimilarityFn>
ExclusionReport apply_exclusions(
    const std::map<std::string, std::vector<SessionRecord>>& by_user,
    const ExclusionConfig& cfg, SimilarityFn&& similarity) {
  ExclusionReport report;
  for (const auto& [user, records] : by_user) {
    if (records.size() < cfg.min_events) {
      report.excluded.push_back({user, "min_events",
                                 std::to_string(records.size()) + " sessions"});
      continue;
    }
    const auto vectors = similarity(user, std::span<const SessionRecord>(records));
    const double var = mean_coordinate_variance(vectors);
    if (var < cfg.min_variance) {
      report.excluded.push_back({user, "low_variance", "variance " + std::to_string(var)});
      continue;
    }
    if (records.front().modality == Modality::kContextual) {
      std::set<std::string> profiles;
      for (const auto& r : records) profiles.insert(r.profile);
      if (profiles.size() < cfg.min_profiles) {
        report.excluded.push_back({user, "min_profiles",
                                   std::to_string(profiles.size()) + " profiles"});
        continue;
      }
    }
    report.retained.push_back(user);
  }
  return report;
}

inline ExclusionReport apply_exclusions(
    const std::map<std::string, std::vector<SessionRecord>>& by_user,
    const FeatureSchema& schema, const ExclusionConfig& cfg = {},
    const ReferenceConfig& ref_cfg = {}) {
  return apply_exclusions(by_user, cfg,
                          [&](const std::string& user, std::span<const SessionRecord> rs) {
                            return in_sample_similarity(user, rs, schema, ref_cfg);
                          });
}

}  // namespace fedrisk
