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

// Keystroke timing rows: subject, sessionIndex, rep, then 31 timings laid out
// as H, DD, UD for each of ten key transitions followed by the final H.

#pragma once

#include <array>
#include <cstdio>
#include <istream>
#include <string>
#include <vector>

#include "fedrisk/dtw.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/ingest/records.hpp"

namespace fedrisk {

inline constexpr std::size_t kKeystrokeTimings = 31;
inline constexpr std::size_t kKeystrokeColumns = kKeystrokeTimings + 3;
inline constexpr const char* kKeystrokeFeature = "keystroke";

enum class KeystrokeLayout {
  kScalar31,      // one 31-step scalar sequence
  kThreeChannel,  // 11 steps of (H, DD, UD); the last step has no latencies
};

struct KeystrokeRow {
  std::string subject;
  long long session_index = 0;
  long long rep = 0;
  std::array<double, kKeystrokeTimings> timings{};
};

inline std::string keystroke_session_id(long long session_index, long long rep) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "s%02lld-r%03lld", session_index, rep);
  return buf;
}

inline Sequence keystroke_sequence(const KeystrokeRow& row,
                                   KeystrokeLayout layout) {
  Sequence seq;
  if (layout == KeystrokeLayout::kScalar31) {
    for (double t : row.timings) seq.push_back({t});
    return seq;
  }
  for (std::size_t i = 0; i + 1 < kKeystrokeTimings; i += 3) {
    seq.push_back({row.timings[i], row.timings[i + 1], row.timings[i + 2]});
  }
  seq.push_back({row.timings[kKeystrokeTimings - 1], 0.0, 0.0});
  return seq;
}

inline SessionRecord keystroke_record(const KeystrokeRow& row,
                                      KeystrokeLayout layout) {
  SessionRecord r;
  r.user_id = row.subject;
  r.session_id = keystroke_session_id(row.session_index, row.rep);
  r.modality = Modality::kKeystroke;
  FeatureObservation o;
  o.feature_id = kKeystrokeFeature;
  o.kind = FeatureKind::kSequence;
  o.payload = keystroke_sequence(row, layout);
  r.observations.push_back(std::move(o));
  return r;
}

inline std::vector<KeystrokeRow> read_keystroke_rows(std::istream& in) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, &line)) {
    fail(ErrorCode::kMalformedRow, "keystroke file is empty");
  }
  if (row.size() != kKeystrokeColumns) {
    fail(ErrorCode::kMalformedRow,
         "keystroke header has " + std::to_string(row.size()) + " columns, expected " +
             std::to_string(kKeystrokeColumns));
  }
  std::vector<KeystrokeRow> out;
  while (csv::read_row(in, row, &line)) {
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;
    if (row.size() != kKeystrokeColumns) {
      fail(ErrorCode::kMalformedRow,
           "line " + std::to_string(line) + ": " + std::to_string(row.size()) +
               " columns, expected " + std::to_string(kKeystrokeColumns));
    }
    KeystrokeRow k;
    k.subject = csv::trim(row[0]);
    const auto session = csv::to_int(row[1]);
    const auto rep = csv::to_int(row[2]);
    if (k.subject.empty() || !session || !rep) {
      fail(ErrorCode::kMalformedRow,
           "line " + std::to_string(line) + ": bad subject/session/rep");
    }
    k.session_index = *session;
    k.rep = *rep;
    for (std::size_t j = 0; j < kKeystrokeTimings; ++j) {
      const auto v = csv::to_double(row[j + 3]);
      if (!v) {
        fail(ErrorCode::kNonNumericTiming,
             "line " + std::to_string(line) + ", column " + std::to_string(j + 4) +
                 ": '" + row[j + 3] + "'");
      }
      k.timings[j] = *v;
    }
    out.push_back(k);
  }
  return out;
}

inline std::vector<SessionRecord> parse_keystroke(
    std::istream& in, KeystrokeLayout layout = KeystrokeLayout::kScalar31) {
  std::vector<SessionRecord> out;
  for (const auto& row : read_keystroke_rows(in)) {
    out.push_back(keystroke_record(row, layout));
  }
  return out;
}

inline FeatureSchema keystroke_schema() {
  return {{.id = kKeystrokeFeature,
           .kind = FeatureKind::kSequence,
           .sequence_mode = SequenceMode::kCentroid}};
}

}  // namespace fedrisk
