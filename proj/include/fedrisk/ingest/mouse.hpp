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

// Mouse event logs to per-session trajectories of (x, y, speed, acceleration).

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedrisk/dtw.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/ingest/records.hpp"

namespace fedrisk {

inline constexpr const char* kMouseFeature = "mouse";

struct MouseEvent {
  double t = 0.0;  // seconds
  std::optional<double> x;
  std::optional<double> y;
};

struct MouseOptions {
  // Longer trajectories are resampled to this many points.
  std::size_t max_points = 200;
  std::size_t top_k = 5;
};

inline bool valid_mouse_event(const MouseEvent& e) {
  return e.x && e.y && *e.x != 0.0 && *e.y != 0.0;
}

// Keeps valid events, resamples, then appends speed and acceleration
// channels. Speed at the first point repeats the first segment's speed and
// acceleration starts at 0, so uniform motion has zero acceleration
// throughout.
inline Sequence mouse_trajectory(std::span<const MouseEvent> events,
                                 std::size_t max_points = 200) {
  std::vector<MouseEvent> kept;
  for (const auto& e : events) {
    if (valid_mouse_event(e)) kept.push_back(e);
  }
  if (kept.empty()) {
    fail(ErrorCode::kEmptySessionAfterFiltering, "no valid mouse events");
  }
  if (max_points >= 2 && kept.size() > max_points) {
    std::vector<MouseEvent> sampled;
    const double step = static_cast<double>(kept.size() - 1) /
                        static_cast<double>(max_points - 1);
    for (std::size_t i = 0; i < max_points; ++i) {
      sampled.push_back(kept[static_cast<std::size_t>(std::lround(i * step))]);
    }
    kept.swap(sampled);
  }

  std::vector<double> positive_dt;
  for (std::size_t i = 1; i < kept.size(); ++i) {
    const double dt = kept[i].t - kept[i - 1].t;
    if (dt > 0.0) positive_dt.push_back(dt);
  }
  double fallback_dt = 1.0;
  if (!positive_dt.empty()) {
    std::nth_element(positive_dt.begin(),
                     positive_dt.begin() + static_cast<std::ptrdiff_t>(positive_dt.size() / 2),
                     positive_dt.end());
    fallback_dt = positive_dt[positive_dt.size() / 2];
  }
  auto dt_at = [&](std::size_t i) {
    const double dt = kept[i].t - kept[i - 1].t;
    return dt > 0.0 ? dt : fallback_dt;
  };

  const std::size_t n = kept.size();
  std::vector<double> speed(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    speed[i] = std::hypot(*kept[i].x - *kept[i - 1].x, *kept[i].y - *kept[i - 1].y) /
               dt_at(i);
  }
  if (n > 1) speed[0] = speed[1];
  std::vector<double> accel(n, 0.0);
  for (std::size_t i = 2; i < n; ++i) accel[i] = (speed[i] - speed[i - 1]) / dt_at(i);

  Sequence seq;
  seq.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    seq.push_back({*kept[i].x, *kept[i].y, speed[i], accel[i]});
  }
  return seq;
}

inline SessionRecord mouse_record(const std::string& user_id,
                                  const std::string& session_id,
                                  std::span<const MouseEvent> events,
                                  const MouseOptions& opt = {}) {
  SessionRecord r;
  r.user_id = user_id;
  r.session_id = session_id;
  r.modality = Modality::kMouse;
  FeatureObservation o;
  o.feature_id = kMouseFeature;
  o.kind = FeatureKind::kSequence;
  try {
    o.payload = mouse_trajectory(events, opt.max_points);
  } catch (const Error& e) {
    fail(e.code(), "user '" + user_id + "', session '" + session_id +
                       "': no valid mouse events");
  }
  r.observations.push_back(std::move(o));
  if (!events.empty()) r.wall_time = static_cast<std::int64_t>(events.front().t);
  return r;
}

// Event rows with at least x and y. A timestamp column ("timestamp",
// "client timestamp" or "record timestamp") is optional; without one the
// event index is used. user_id / session_id columns, when present, split
// the file; otherwise every event belongs to the given defaults.
inline std::vector<SessionRecord> parse_mouse(std::istream& in,
                                              const std::string& default_user,
                                              const std::string& default_session,
                                              const MouseOptions& opt = {}) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, &line)) {
    fail(ErrorCode::kMalformedRow, "mouse file is empty");
  }
  const csv::Header header(row);
  const auto cx = header.find({"x"});
  const auto cy = header.find({"y"});
  if (!cx || !cy) fail(ErrorCode::kMalformedRow, "mouse header needs x and y columns");
  const auto ct = header.find({"timestamp", "client_timestamp", "record_timestamp"});
  const auto cu = header.find({"user_id", "user"});
  const auto cs = header.find({"session_id", "session"});

  std::map<std::pair<std::string, std::string>, std::vector<MouseEvent>> sessions;
  std::vector<std::pair<std::string, std::string>> order;
  std::size_t index = 0;
  while (csv::read_row(in, row, &line)) {
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;
    if (row.size() != header.size()) {
      fail(ErrorCode::kMalformedRow, "line " + std::to_string(line) + ": " +
                                         std::to_string(row.size()) + " columns, expected " +
                                         std::to_string(header.size()));
    }
    MouseEvent e;
    e.t = static_cast<double>(index++);
    if (ct) {
      const auto t = csv::to_double(row[*ct]);
      if (!t) fail(ErrorCode::kMalformedRow, "line " + std::to_string(line) + ": bad timestamp");
      e.t = *t;
    }
    e.x = csv::to_double(row[*cx]);
    e.y = csv::to_double(row[*cy]);
    std::pair<std::string, std::string> key = {
        cu ? csv::trim(row[*cu]) : default_user,
        cs ? csv::trim(row[*cs]) : default_session};
    auto [it, fresh] = sessions.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(e);
  }
  std::vector<SessionRecord> out;
  for (const auto& key : order) {
    out.push_back(mouse_record(key.first, key.second, sessions[key], opt));
  }
  return out;
}

// The user is the parent directory name and the session the file stem, as in
// <root>/user12/session_0335985747.
inline std::vector<SessionRecord> parse_mouse_file(const std::filesystem::path& path,
                                                   const MouseOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  return parse_mouse(in, path.parent_path().filename().string(),
                     path.stem().string(), opt);
}

inline FeatureSchema mouse_schema(std::size_t top_k = 5) {
  return {{.id = kMouseFeature,
           .kind = FeatureKind::kSequence,
           .sequence_mode = SequenceMode::kTopK,
           .top_k = top_k}};
}

}  // namespace fedrisk
