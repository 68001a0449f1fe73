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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/reference.hpp"

namespace fedrisk {

enum class Modality { kKeystroke, kMouse, kContextual };

constexpr std::string_view modality_name(Modality m) {
  switch (m) {
    case Modality::kKeystroke: return "keystroke";
    case Modality::kMouse: return "mouse";
    case Modality::kContextual: return "contextual";
  }
  return "unknown";
}

inline Modality parse_modality(std::string_view s) {
  if (s == "keystroke") return Modality::kKeystroke;
  if (s == "mouse") return Modality::kMouse;
  if (s == "contextual") return Modality::kContextual;
  fail(ErrorCode::kConfigError, "unknown modality '" + std::string(s) + "'");
}

struct SessionRecord {
  std::string user_id;
  std::string session_id;
  Modality modality = Modality::kKeystroke;
  SessionObservations observations;
  std::optional<std::int64_t> wall_time;  // unix seconds
  // Contextual only: identifies the (ip, device, user agent) profile.
  std::string profile;
};

// (user_id, session_id) -> anomalous. Kept apart from SessionRecord so it
// can only reach evaluation code.
using GroundTruth = std::map<std::pair<std::string, std::string>, bool>;

// Records grouped per user, users in id order, sessions in input order.
inline std::map<std::string, std::vector<SessionRecord>> group_by_user(
    std::vector<SessionRecord> records) {
  std::map<std::string, std::vector<SessionRecord>> out;
  for (auto& r : records) out[r.user_id].push_back(std::move(r));
  return out;
}

}  // namespace fedrisk
