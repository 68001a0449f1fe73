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

#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/ingest/records.hpp"

namespace fedrisk {

inline constexpr int kDatasetSchemaVersion = 1;

inline FeatureKind parse_feature_kind(std::string_view s) {
  for (FeatureKind k : {FeatureKind::kBinary, FeatureKind::kVector, FeatureKind::kSequence,
                        FeatureKind::kSetMember, FeatureKind::kGeo, FeatureKind::kVersion,
                        FeatureKind::kCategorySet, FeatureKind::kScalar}) {
    if (feature_kind_name(k) == s) return k;
  }
  fail(ErrorCode::kConfigError, "unknown feature kind '" + std::string(s) + "'");
}

namespace dataset_detail {

using Json = nlohmann::ordered_json;

inline Json payload_json(const FeatureObservation& o) {
  switch (o.kind) {
    case FeatureKind::kBinary:
    case FeatureKind::kSetMember:
      return std::get<std::string>(o.payload);
    case FeatureKind::kVector:
      return std::get<std::vector<double>>(o.payload);
    case FeatureKind::kSequence:
      return std::get<Sequence>(o.payload);
    case FeatureKind::kGeo: {
      const auto& g = std::get<GeoPoint>(o.payload);
      return Json{{"lat_rad", g.lat_rad}, {"lon_rad", g.lon_rad}};
    }
    case FeatureKind::kVersion:
    case FeatureKind::kScalar:
      return std::get<double>(o.payload);
    case FeatureKind::kCategorySet:
      return std::get<StringSet>(o.payload);
  }
  return nullptr;
}

inline FeaturePayload payload_from_json(FeatureKind kind, const Json& v) {
  switch (kind) {
    case FeatureKind::kBinary:
    case FeatureKind::kSetMember:
      return v.get<std::string>();
    case FeatureKind::kVector:
      return v.get<std::vector<double>>();
    case FeatureKind::kSequence:
      return v.get<Sequence>();
    case FeatureKind::kGeo:
      return GeoPoint{v.at("lat_rad").get<double>(), v.at("lon_rad").get<double>()};
    case FeatureKind::kVersion:
    case FeatureKind::kScalar:
      return v.get<double>();
    case FeatureKind::kCategorySet:
      return v.get<StringSet>();
  }
  return 0.0;
}

}  // namespace dataset_detail

// The normalized dataset written by ingest: one JSON document holding every
// session's typed observations.
inline std::string dataset_to_json(Modality modality, std::span<const SessionRecord> records) {
  using dataset_detail::Json;
  Json doc;
  doc["schema_version"] = kDatasetSchemaVersion;
  doc["modality"] = modality_name(modality);
  Json arr = Json::array();
  for (const auto& r : records) {
    Json rec;
    rec["user_id"] = r.user_id;
    rec["session_id"] = r.session_id;
    if (r.wall_time) rec["wall_time"] = *r.wall_time;
    if (!r.profile.empty()) rec["profile"] = r.profile;
    Json obs = Json::array();
    for (const auto& o : r.observations) {
      Json j;
      j["id"] = o.feature_id;
      j["kind"] = feature_kind_name(o.kind);
      if (o.population_baseline) j["population_baseline"] = true;
      if (o.missing) {
        j["missing"] = true;
      } else {
        j["value"] = dataset_detail::payload_json(o);
      }
      obs.push_back(std::move(j));
    }
    rec["observations"] = std::move(obs);
    arr.push_back(std::move(rec));
  }
  doc["records"] = std::move(arr);
  return doc.dump(1) + "\n";
}

struct LoadedDataset {
  Modality modality = Modality::kKeystroke;
  std::vector<SessionRecord> records;
};

inline LoadedDataset dataset_from_json(std::string_view text) {
  using dataset_detail::Json;
  LoadedDataset out;
  try {
    const Json doc = Json::parse(text);
    if (doc.at("schema_version").get<int>() != kDatasetSchemaVersion) {
      fail(ErrorCode::kConfigError, "unsupported dataset schema_version " +
                                        doc.at("schema_version").dump());
    }
    out.modality = parse_modality(doc.at("modality").get<std::string>());
    for (const auto& rec : doc.at("records")) {
      SessionRecord r;
      r.modality = out.modality;
      r.user_id = rec.at("user_id").get<std::string>();
      r.session_id = rec.at("session_id").get<std::string>();
      if (rec.contains("wall_time")) r.wall_time = rec["wall_time"].get<std::int64_t>();
      r.profile = rec.value("profile", std::string());
      for (const auto& j : rec.at("observations")) {
        FeatureObservation o;
        o.feature_id = j.at("id").get<std::string>();
        o.kind = parse_feature_kind(j.at("kind").get<std::string>());
        o.population_baseline = j.value("population_baseline", false);
        o.missing = j.value("missing", false);
        if (!o.missing) o.payload = dataset_detail::payload_from_json(o.kind, j.at("value"));
        validate_observation(o);
        r.observations.push_back(std::move(o));
      }
      out.records.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("malformed dataset: ") + e.what());
  }
  return out;
}

// Ground truth as CSV: user_id,session_id,anomalous (0 or 1).
inline std::string truth_to_csv(const GroundTruth& truth) {
  std::ostringstream out;
  csv::write_row(out, {"user_id", "session_id", "anomalous"});
  for (const auto& [key, anomalous] : truth) {
    csv::write_row(out, {key.first, key.second, anomalous ? "1" : "0"});
  }
  return out.str();
}

inline GroundTruth truth_from_csv(std::istream& in) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, &line)) fail(ErrorCode::kMalformedRow, "truth file is empty");
  const csv::Header header(row);
  const auto cu = header.find({"user_id", "user"});
  const auto cs = header.find({"session_id", "session"});
  const auto ca = header.find({"anomalous", "anomaly", "label"});
  if (!cu || !cs || !ca) {
    fail(ErrorCode::kMalformedRow, "truth header needs user_id, session_id and anomalous");
  }
  GroundTruth truth;
  while (csv::read_row(in, row, &line)) {
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;
    if (row.size() != header.size()) {
      fail(ErrorCode::kMalformedRow, "truth line " + std::to_string(line) + ": wrong column count");
    }
    const auto a = csv::to_int(row[*ca]);
    if (!a || (*a != 0 && *a != 1)) {
      fail(ErrorCode::kMalformedRow, "truth line " + std::to_string(line) + ": anomalous must be 0 or 1");
    }
    truth[{csv::trim(row[*cu]), csv::trim(row[*cs])}] = *a == 1;
  }
  return truth;
}

}  // namespace fedrisk
