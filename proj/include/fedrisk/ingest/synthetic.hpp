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

// Seeded synthetic datasets. Legitimate sessions jitter around a per-user
// base pattern; anomalous sessions come from a shifted distribution. The
// generator emits the same raw rows a dataset file would hold and runs them
// through the regular builders.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "fedrisk/dp.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/ingest/contextual.hpp"
#include "fedrisk/ingest/geo.hpp"
#include "fedrisk/ingest/keystroke.hpp"
#include "fedrisk/ingest/mouse.hpp"
#include "fedrisk/ingest/records.hpp"

namespace fedrisk {

struct SynthProfile {
  Modality modality = Modality::kKeystroke;
  std::size_t users = 20;
  std::size_t sessions_per_user = 30;
  double anomaly_fraction = 0.1;
  std::uint64_t seed = 42;
};

struct MouseSession {
  std::string user_id;
  std::string session_id;
  std::vector<MouseEvent> events;
};

struct SynthDataset {
  std::vector<SessionRecord> records;
  GroundTruth truth;
  // Raw material, filled for the profile's modality only.
  std::vector<KeystrokeRow> keystroke_rows;
  std::vector<MouseSession> mouse_sessions;
  std::vector<LoginRow> logins;
  GeoTable geo;
};

inline std::string synth_user_id(std::size_t u) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "user%02zu", u + 1);
  return buf;
}

inline std::string synth_mouse_session_id(std::size_t j) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "session_%03zu", j + 1);
  return buf;
}

// Exactly round(fraction * sessions) anomalous positions, seeded per user.
inline std::vector<bool> synth_anomaly_mask(std::size_t sessions, double fraction,
                                            std::mt19937_64& rng) {
  const auto count = static_cast<std::size_t>(
      std::lround(fraction * static_cast<double>(sessions)));
  std::vector<bool> mask(sessions, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(count), true);
  std::shuffle(mask.begin(), mask.end(), rng);
  return mask;
}

namespace synth_detail {

struct City {
  const char* name;
  const char* region;
  const char* country;
  double lat;
  double lon;
};

inline constexpr std::array<City, 12> kCities = {{
    {"Oslo", "Oslo", "NO", 59.91, 10.75},
    {"Berlin", "Berlin", "DE", 52.52, 13.40},
    {"Paris", "Ile-de-France", "FR", 48.86, 2.35},
    {"Madrid", "Madrid", "ES", 40.42, -3.70},
    {"New York", "New York", "US", 40.71, -74.01},
    {"Chicago", "Illinois", "US", 41.88, -87.63},
    {"Sao Paulo", "Sao Paulo", "BR", -23.55, -46.63},
    {"Tokyo", "Tokyo", "JP", 35.68, 139.69},
    {"Sydney", "New South Wales", "AU", -33.87, 151.21},
    {"Mumbai", "Maharashtra", "IN", 19.08, 72.88},
    {"Lagos", "Lagos", "NG", 6.52, 3.38},
    {"Toronto", "Ontario", "CA", 43.65, -79.38},
}};

inline constexpr std::array<City, 10> kHostingSites = {{
    {"Ashburn", "Virginia", "US", 39.04, -77.49},
    {"Singapore", "Singapore", "SG", 1.35, 103.82},
    {"Frankfurt", "Hesse", "DE", 50.11, 8.68},
    {"Amsterdam", "North Holland", "NL", 52.37, 4.90},
    {"Moscow", "Moscow", "RU", 55.76, 37.62},
    {"Hong Kong", "Hong Kong", "HK", 22.32, 114.17},
    {"Dallas", "Texas", "US", 32.78, -96.80},
    {"Bucharest", "Bucharest", "RO", 44.43, 26.10},
    {"Johannesburg", "Gauteng", "ZA", -26.20, 28.05},
    {"Seoul", "Seoul", "KR", 37.57, 126.98},
}};

struct Agent {
  const char* ua;
  const char* device;
};

inline constexpr std::array<Agent, 6> kAgents = {{
    {"Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) "
     "Chrome/108.0.0.0 Safari/537.36",
     "desktop"},
    {"Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) AppleWebKit/605.1.15 (KHTML, like "
     "Gecko) Version/16.1 Safari/605.1.15",
     "desktop"},
    {"Mozilla/5.0 (Windows NT 10.0; Win64; x64; rv:107.0) Gecko/20100101 Firefox/107.0",
     "desktop"},
    {"Mozilla/5.0 (Linux; Android 13; Pixel 7) AppleWebKit/537.36 (KHTML, like Gecko) "
     "Chrome/108.0.0.0 Mobile Safari/537.36",
     "mobile"},
    {"Mozilla/5.0 (iPhone; CPU iPhone OS 16_1 like Mac OS X) AppleWebKit/605.1.15 (KHTML, "
     "like Gecko) Version/16.1 Mobile/15E148 Safari/604.1",
     "mobile"},
    {"Mozilla/5.0 (X11; Linux x86_64; rv:102.0) Gecko/20100101 Firefox/102.0", "desktop"},
}};

inline constexpr std::array<const char*, 4> kScriptAgents = {
    "python-requests/2.28.1", "curl/7.85.0", "Go-http-client/1.1", "okhttp/4.10.0"};

inline std::string city_prefix(std::size_t i) { return "81." + std::to_string(10 + i) + "."; }
inline std::string hosting_prefix(std::size_t i) {
  return "185." + std::to_string(200 + i) + ".";
}

inline GeoTable synth_geo_table() {
  std::vector<GeoEntry> entries;
  for (std::size_t i = 0; i < kCities.size(); ++i) {
    const auto& c = kCities[i];
    entries.push_back({city_prefix(i), c.lat, c.lon, "AS" + std::to_string(3300 + i), c.country,
                       c.region, c.name, "isp"});
  }
  for (std::size_t i = 0; i < kHostingSites.size(); ++i) {
    const auto& c = kHostingSites[i];
    entries.push_back({hosting_prefix(i), c.lat, c.lon, "AS" + std::to_string(16500 + i),
                       c.country, c.region, c.name, "hosting"});
  }
  return GeoTable(std::move(entries));
}

inline std::array<double, kKeystrokeTimings> keystroke_base(std::mt19937_64& rng,
                                                            double dd_scale) {
  std::uniform_real_distribution<double> hold(0.06, 0.16);
  std::uniform_real_distribution<double> down_down(0.15, 0.45);
  std::array<double, kKeystrokeTimings> t{};
  for (std::size_t i = 0; i + 1 < kKeystrokeTimings; i += 3) {
    t[i] = hold(rng);
    t[i + 1] = down_down(rng) * dd_scale;
    t[i + 2] = t[i + 1] - t[i];
  }
  t[kKeystrokeTimings - 1] = hold(rng);
  return t;
}

inline std::array<double, kKeystrokeTimings> keystroke_jitter(
    const std::array<double, kKeystrokeTimings>& base, double spread, std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, spread);
  std::array<double, kKeystrokeTimings> t{};
  for (std::size_t i = 0; i + 1 < kKeystrokeTimings; i += 3) {
    t[i] = base[i] * std::exp(noise(rng));
    t[i + 1] = base[i + 1] * std::exp(noise(rng));
    t[i + 2] = t[i + 1] - t[i];
  }
  t[kKeystrokeTimings - 1] = base[kKeystrokeTimings - 1] * std::exp(noise(rng));
  for (double& v : t) v = std::round(v * 1e4) / 1e4;
  return t;
}

struct Stroke {
  double x0, y0, length, angle, bulge, duration;
};

inline std::vector<MouseEvent> stroke_events(const Stroke& s, double t0, std::mt19937_64& rng) {
  constexpr double kDt = 0.05;
  const auto n = static_cast<std::size_t>(std::max(8.0, std::round(s.duration / kDt)));
  const double dx = std::cos(s.angle);
  const double dy = std::sin(s.angle);
  std::vector<MouseEvent> events;
  std::uniform_int_distribution<std::size_t> where(1, n - 1);
  const std::size_t glitch = where(rng);
  for (std::size_t i = 0; i <= n; ++i) {
    const double tau = static_cast<double>(i) / static_cast<double>(n);
    // Minimum-jerk progress along the chord, with a sideways bulge.
    const double p = tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
    const double side = s.bulge * std::sin(std::numbers::pi * p);
    MouseEvent e;
    e.t = t0 + static_cast<double>(i) * kDt;
    e.x = std::clamp(std::round(s.x0 + s.length * p * dx - side * dy), 1.0, 1919.0);
    e.y = std::clamp(std::round(s.y0 + s.length * p * dy + side * dx), 1.0, 1079.0);
    events.push_back(e);
    if (i == glitch) {
      // Logger artifact: a zero-coordinate event that ingestion drops.
      events.push_back({e.t, 0.0, 0.0});
    }
  }
  return events;
}

inline void gen_keystroke(const SynthProfile& p, SynthDataset& out) {
  for (std::size_t u = 0; u < p.users; ++u) {
    const std::string user = synth_user_id(u);
    std::mt19937_64 rng(derive_seed(p.seed, fnv1a64(user), 1));
    const auto mask = synth_anomaly_mask(p.sessions_per_user, p.anomaly_fraction, rng);
    const auto base = keystroke_base(rng, 1.0);
    // Impostors hold keys longer and move between them more slowly.
    auto shifted = base;
    for (std::size_t i = 0; i + 1 < kKeystrokeTimings; i += 3) {
      shifted[i] = base[i] * 1.35;
      shifted[i + 1] = base[i + 1] * 1.6;
      shifted[i + 2] = shifted[i + 1] - shifted[i];
    }
    shifted[kKeystrokeTimings - 1] = base[kKeystrokeTimings - 1] * 1.35;
    for (std::size_t j = 0; j < p.sessions_per_user; ++j) {
      KeystrokeRow row;
      row.subject = user;
      row.session_index = 1 + static_cast<long long>(j / 50);
      row.rep = 1 + static_cast<long long>(j % 50);
      if (mask[j]) {
        row.timings = keystroke_jitter(shifted, 0.08, rng);
      } else {
        row.timings = keystroke_jitter(base, 0.08, rng);
      }
      out.truth[{user, keystroke_session_id(row.session_index, row.rep)}] = mask[j];
      out.records.push_back(keystroke_record(row, KeystrokeLayout::kScalar31));
      out.keystroke_rows.push_back(row);
    }
  }
}

inline void gen_mouse(const SynthProfile& p, SynthDataset& out) {
  for (std::size_t u = 0; u < p.users; ++u) {
    const std::string user = synth_user_id(u);
    std::mt19937_64 rng(derive_seed(p.seed, fnv1a64(user), 2));
    const auto mask = synth_anomaly_mask(p.sessions_per_user, p.anomaly_fraction, rng);
    std::uniform_real_distribution<double> ux(600.0, 1300.0);
    std::uniform_real_distribution<double> uy(350.0, 700.0);
    std::uniform_real_distribution<double> ulen(300.0, 450.0);
    std::uniform_real_distribution<double> uangle(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> ubulge(-80.0, 80.0);
    std::uniform_real_distribution<double> udur(0.8, 1.2);
    const Stroke base{ux(rng), uy(rng), ulen(rng), uangle(rng), ubulge(rng), udur(rng)};
    std::normal_distribution<double> n01(0.0, 1.0);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (std::size_t j = 0; j < p.sessions_per_user; ++j) {
      Stroke s{base.x0 + 8.0 * n01(rng),
               base.y0 + 8.0 * n01(rng),
               base.length * (1.0 + 0.03 * n01(rng)),
               base.angle + 0.03 * n01(rng),
               base.bulge + 5.0 * n01(rng),
               base.duration * (1.0 + 0.03 * n01(rng))};
      if (mask[j]) {
        // Impostor strokes run at about three times the user's pace from a
        // displaced start.
        const double dir = 2.0 * std::numbers::pi * u01(rng);
        s.x0 = base.x0 + 300.0 * std::cos(dir);
        s.y0 = base.y0 + 300.0 * std::sin(dir);
        s.duration = base.duration * (0.35 + 0.02 * n01(rng));
      }
      MouseSession ms{user, synth_mouse_session_id(j),
                      stroke_events(s, 1000.0 * static_cast<double>(j + 1), rng)};
      out.truth[{user, ms.session_id}] = mask[j];
      out.records.push_back(mouse_record(ms.user_id, ms.session_id, ms.events));
      out.mouse_sessions.push_back(std::move(ms));
    }
  }
}

inline void gen_contextual(const SynthProfile& p, SynthDataset& out) {
  constexpr std::int64_t kEpoch = 1577836800;  // 2020-01-01T00:00:00Z
  out.geo = synth_geo_table();
  for (std::size_t u = 0; u < p.users; ++u) {
    const std::string user = synth_user_id(u);
    std::mt19937_64 rng(derive_seed(p.seed, fnv1a64(user), 3));
    const auto mask = synth_anomaly_mask(p.sessions_per_user, p.anomaly_fraction, rng);
    std::uniform_int_distribution<std::size_t> pick_city(0, kCities.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_agent(0, kAgents.size() - 1);
    std::uniform_int_distribution<int> octet(1, 254);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const std::size_t home = pick_city(rng);
    const std::size_t agent = pick_agent(rng);
    const std::size_t second_agent =
        (agent + 1 + std::uniform_int_distribution<std::size_t>(0, kAgents.size() - 2)(rng)) %
        kAgents.size();
    std::array<std::string, 3> ips;
    for (auto& ip : ips) {
      ip = city_prefix(home) + std::to_string(octet(rng)) + "." + std::to_string(octet(rng));
    }
    const double usual_hour = 7.0 + 14.0 * u01(rng);
    const double rtt = 20.0 + 100.0 * u01(rng);
    std::uniform_int_distribution<std::size_t> pick_ip(0, ips.size() - 1);

    for (std::size_t j = 0; j < p.sessions_per_user; ++j) {
      LoginRow row;
      row.user_id = user;
      double hour = usual_hour + 1.0 * n01(rng);
      if (mask[j]) hour += 12.0;
      hour = std::fmod(std::fmod(hour, 24.0) + 24.0, 24.0);
      const auto day = static_cast<std::int64_t>(u * 1000 + 2 * j);
      row.timestamp = kEpoch + day * kSecondsPerDay +
                      std::min<std::int64_t>(static_cast<std::int64_t>(hour * 3600.0),
                                             kSecondsPerDay - 1);
      if (mask[j]) {
        const std::size_t site =
            std::uniform_int_distribution<std::size_t>(0, kHostingSites.size() - 1)(rng);
        row.ip = hosting_prefix(site) + std::to_string(octet(rng)) + "." +
                 std::to_string(octet(rng));
        if (u01(rng) < 1.0 / 3.0) {
          row.user_agent = kScriptAgents[std::uniform_int_distribution<std::size_t>(
              0, kScriptAgents.size() - 1)(rng)];
          row.device_type = "bot";
        } else {
          const std::size_t other =
              (agent + 1 + std::uniform_int_distribution<std::size_t>(0, kAgents.size() - 2)(rng)) %
              kAgents.size();
          row.user_agent = kAgents[other].ua;
          row.device_type = kAgents[other].device;
        }
        row.rtt_ms = std::round(rtt * (3.0 + 2.0 * u01(rng)));
        row.is_attack_ip = true;
      } else {
        // Legitimate users sometimes switch devices.
        const std::size_t a = u01(rng) < 0.15 ? second_agent : agent;
        row.ip = ips[pick_ip(rng)];
        row.user_agent = kAgents[a].ua;
        row.device_type = kAgents[a].device;
        row.rtt_ms = std::round(rtt * std::exp(0.1 * n01(rng)));
        row.is_attack_ip = false;
      }
      char sid[24];
      std::snprintf(sid, sizeof(sid), "c%05zu", j);
      out.truth[{user, sid}] = mask[j];
      out.logins.push_back(std::move(row));
    }
  }
  out.records = build_contextual(out.logins, out.geo);
}

}  // namespace synth_detail

inline SynthDataset synth_generate(const SynthProfile& p) {
  if (p.users < 1 || p.sessions_per_user < 1) {
    fail(ErrorCode::kInvalidArgument, "synthetic profile needs at least one user and session");
  }
  if (!(p.anomaly_fraction >= 0.0 && p.anomaly_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "anomaly fraction must be in [0, 1)");
  }
  SynthDataset out;
  switch (p.modality) {
    case Modality::kKeystroke: synth_detail::gen_keystroke(p, out); break;
    case Modality::kMouse: synth_detail::gen_mouse(p, out); break;
    case Modality::kContextual: synth_detail::gen_contextual(p, out); break;
  }
  return out;
}

inline std::size_t count_anomalies(const GroundTruth& truth) {
  std::size_t n = 0;
  for (const auto& [key, anomalous] : truth) n += anomalous ? 1 : 0;
  return n;
}

}  // namespace fedrisk
