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

// Login events to 24 contextual observations per login.
//
// Slot order (schema version 1):
//   geo, city, region, country, os_name, browser_name, os_version,
//   browser_version, device_type, ip, asn, asn_category, is_benign,
//   login_hour, hour_bucket, weekday, freq_7d, login_gap, rtt, ua_os,
//   ua_arch, ua_engine, ua_browser, ua_tokens

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/ingest/geo.hpp"
#include "fedrisk/ingest/records.hpp"
#include "fedrisk/ingest/user_agent.hpp"

namespace fedrisk {

inline constexpr int kContextualSchemaVersion = 1;
inline constexpr std::size_t kContextualDims = 24;
inline constexpr std::int64_t kSecondsPerDay = 86400;

struct LoginRow {
  std::string user_id;
  std::int64_t timestamp = 0;  // unix seconds, UTC
  std::string ip;
  std::string user_agent;
  std::string device_type;
  // Free-form "name version" fields such as "Chrome 79.0.3945".
  std::string browser;
  std::string os;
  // Dedicated version columns win over the free-form fields.
  std::string browser_version;
  std::string os_version;
  // Location and network columns, when the login file carries them.
  std::string country;
  std::string region;
  std::string city;
  std::string asn;
  std::optional<double> rtt_ms;
  std::optional<bool> is_attack_ip;
};

inline FeatureSchema contextual_schema() {
  using K = FeatureKind;
  auto spec = [](const char* id, K kind) {
    FeatureSpec s;
    s.id = id;
    s.kind = kind;
    return s;
  };
  FeatureSchema s;
  s.push_back(spec("geo", K::kGeo));
  s.back().max_distance = 1000.0;
  for (const char* id : {"city", "region", "country"}) s.push_back(spec(id, K::kSetMember));
  s.push_back(spec("os_name", K::kBinary));
  s.push_back(spec("browser_name", K::kBinary));
  s.push_back(spec("os_version", K::kVersion));
  s.push_back(spec("browser_version", K::kVersion));
  s.push_back(spec("device_type", K::kSetMember));
  s.push_back(spec("ip", K::kSetMember));
  s.back().decay_alpha = 0.5;
  s.push_back(spec("asn", K::kSetMember));
  s.back().decay_alpha = 0.5;
  s.push_back(spec("asn_category", K::kSetMember));
  s.push_back(spec("is_benign", K::kBinary));
  s.push_back(spec("login_hour", K::kScalar));
  s.back().scalar_metric = ScalarMetric::kCircular24h;
  s.back().max_distance = 12.0;
  s.push_back(spec("hour_bucket", K::kSetMember));
  s.push_back(spec("weekday", K::kSetMember));
  s.push_back(spec("freq_7d", K::kScalar));
  s.back().max_distance = 1.0;
  s.push_back(spec("login_gap", K::kScalar));
  s.back().max_distance = 6.0;
  s.push_back(spec("rtt", K::kScalar));
  s.back().max_distance = 3.0;
  for (const char* id : {"ua_os", "ua_arch", "ua_engine", "ua_browser"}) {
    s.push_back(spec(id, K::kBinary));
  }
  s.push_back(spec("ua_tokens", K::kCategorySet));
  return s;
}

// Unix seconds from an integer or decimal epoch, or from a UTC
// "YYYY-MM-DD HH:MM:SS[.fff]" stamp ('T' separator and trailing 'Z' allowed).
inline std::optional<std::int64_t> parse_timestamp(std::string_view text) {
  const std::string s = csv::trim(text);
  if (s.empty()) return std::nullopt;
  if (const auto i = csv::to_int(s)) return *i;
  if (const auto d = csv::to_double(s)) return static_cast<std::int64_t>(std::floor(*d));
  int y = 0;
  unsigned mo = 0;
  unsigned d = 0;
  int h = 0;
  int mi = 0;
  int sec = 0;
  char sep = 0;
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%d-%u-%u%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &sec,
                  &consumed) != 7 ||
      (sep != ' ' && sep != 'T')) {
    return std::nullopt;
  }
  std::string_view rest = std::string_view(s).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && std::isdigit(static_cast<unsigned char>(rest.front()))) {
      rest.remove_prefix(1);
    }
  }
  if (rest == "Z") rest = {};
  if (!rest.empty()) return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo},
                                        std::chrono::day{d}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60) {
    return std::nullopt;
  }
  const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
  return static_cast<std::int64_t>(days) * kSecondsPerDay + h * 3600 + mi * 60 + sec;
}

namespace contextual_detail {

inline FeatureObservation text_obs(const char* id, FeatureKind kind, const std::string& v) {
  if (v.empty()) return FeatureObservation::absent(id, kind);
  FeatureObservation o;
  o.feature_id = id;
  o.kind = kind;
  o.payload = v;
  return o;
}

inline FeatureObservation number_obs(const char* id, FeatureKind kind,
                                     std::optional<double> v) {
  if (!v) return FeatureObservation::absent(id, kind);
  FeatureObservation o;
  o.feature_id = id;
  o.kind = kind;
  o.payload = *v;
  return o;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

inline SessionObservations login_observations(const LoginRow& row, const GeoTable& geo,
                                              double freq_7d,
                                              std::optional<double> gap_seconds) {
  using K = FeatureKind;
  const GeoEntry* entry = geo.lookup(row.ip);
  const auto ua = parse_user_agent(row.user_agent);
  auto pick = [](const std::string& own, const std::string* fallback) {
    if (!own.empty()) return own;
    return fallback != nullptr ? *fallback : std::string();
  };

  SessionObservations obs;
  obs.reserve(kContextualDims);
  if (entry != nullptr) {
    FeatureObservation g;
    g.feature_id = "geo";
    g.kind = K::kGeo;
    g.payload = geo_from_degrees(entry->lat_deg, entry->lon_deg);
    obs.push_back(std::move(g));
  } else {
    obs.push_back(FeatureObservation::absent("geo", K::kGeo));
  }
  obs.push_back(text_obs("city", K::kSetMember, pick(row.city, entry ? &entry->city : nullptr)));
  obs.push_back(
      text_obs("region", K::kSetMember, pick(row.region, entry ? &entry->region : nullptr)));
  obs.push_back(
      text_obs("country", K::kSetMember, pick(row.country, entry ? &entry->country : nullptr)));

  std::string os_name = leading_name(row.os);
  std::string browser_name = leading_name(row.browser);
  if (os_name.empty() && ua) os_name = ua->os;
  if (browser_name.empty() && ua) browser_name = ua->browser;
  obs.push_back(text_obs("os_name", K::kBinary, os_name));
  obs.push_back(text_obs("browser_name", K::kBinary, browser_name));

  auto version = [&](const std::string& dedicated, const std::string& combined,
                     std::optional<double> from_ua) {
    if (auto v = leading_version(dedicated)) return v;
    if (auto v = leading_version(combined)) return v;
    return from_ua;
  };
  obs.push_back(number_obs("os_version", K::kVersion,
                           version(row.os_version, row.os,
                                   ua ? ua->os_version : std::nullopt)));
  obs.push_back(number_obs("browser_version", K::kVersion,
                           version(row.browser_version, row.browser,
                                   ua ? ua->browser_version : std::nullopt)));
  obs.push_back(text_obs("device_type", K::kSetMember, row.device_type));
  obs.push_back(text_obs("ip", K::kSetMember, row.ip));
  obs.push_back(text_obs("asn", K::kSetMember, pick(row.asn, entry ? &entry->asn : nullptr)));
  const std::string category = entry ? entry->asn_category : std::string();
  obs.push_back(text_obs("asn_category", K::kSetMember, category));
  std::string benign;
  if (row.is_attack_ip) {
    benign = *row.is_attack_ip ? "0" : "1";
  } else if (!category.empty()) {
    benign = category == "hosting" ? "0" : "1";
  }
  obs.push_back(text_obs("is_benign", K::kBinary, benign));

  const std::int64_t second_of_day =
      row.timestamp - floor_div(row.timestamp, kSecondsPerDay) * kSecondsPerDay;
  const double hour = static_cast<double>(second_of_day) / 3600.0;
  obs.push_back(number_obs("login_hour", K::kScalar, hour));
  obs.push_back(text_obs("hour_bucket", K::kSetMember,
                         "h" + std::to_string(second_of_day / (4 * 3600))));
  const std::chrono::sys_days day{
      std::chrono::days{floor_div(row.timestamp, kSecondsPerDay)}};
  obs.push_back(text_obs("weekday", K::kSetMember,
                         "d" + std::to_string(std::chrono::weekday{day}.c_encoding())));
  obs.push_back(number_obs("freq_7d", K::kScalar, freq_7d));
  obs.push_back(number_obs(
      "login_gap", K::kScalar,
      gap_seconds ? std::optional<double>(std::log10(1.0 + *gap_seconds)) : std::nullopt));
  obs.push_back(number_obs("rtt", K::kScalar,
                           row.rtt_ms && *row.rtt_ms > 0.0
                               ? std::optional<double>(std::log10(*row.rtt_ms))
                               : std::nullopt));

  obs.push_back(text_obs("ua_os", K::kBinary, ua ? ua->os : std::string()));
  obs.push_back(text_obs("ua_arch", K::kBinary, ua ? ua->arch : std::string()));
  obs.push_back(text_obs("ua_engine", K::kBinary, ua ? ua->engine : std::string()));
  obs.push_back(text_obs("ua_browser", K::kBinary, ua ? ua->browser : std::string()));
  if (ua) {
    FeatureObservation t;
    t.feature_id = "ua_tokens";
    t.kind = K::kCategorySet;
    t.payload = ua->tokens;
    obs.push_back(std::move(t));
  } else {
    obs.push_back(FeatureObservation::absent("ua_tokens", K::kCategorySet));
  }
  return obs;
}

}  // namespace contextual_detail

// One record per login: users in id order, each user's logins in time order
// (ties keep input order). Session ids are "c00000", "c00001", ... per user.
inline std::vector<SessionRecord> build_contextual(std::vector<LoginRow> rows,
                                                   const GeoTable& geo) {
  std::map<std::string, std::vector<LoginRow>> by_user;
  for (auto& r : rows) by_user[r.user_id].push_back(std::move(r));

  std::vector<SessionRecord> out;
  for (auto& [user, logins] : by_user) {
    std::stable_sort(logins.begin(), logins.end(),
                     [](const LoginRow& a, const LoginRow& b) { return a.timestamp < b.timestamp; });
    const std::size_t n = logins.size();
    // Logins sharing a timestamp count as one instant: each sees the whole
    // group in its 7-day window and the same gap to the previous instant.
    std::vector<std::size_t> weekly(n, 0);
    std::vector<std::optional<double>> gaps(n);
    std::size_t lo = 0;
    std::size_t max_weekly = 1;
    for (std::size_t i = 0; i < n;) {
      std::size_t end = i;
      while (end < n && logins[end].timestamp == logins[i].timestamp) ++end;
      while (logins[lo].timestamp <= logins[i].timestamp - 7 * kSecondsPerDay) ++lo;
      for (std::size_t j = i; j < end; ++j) {
        weekly[j] = end - lo;
        if (i > 0) gaps[j] = static_cast<double>(logins[i].timestamp - logins[i - 1].timestamp);
      }
      max_weekly = std::max(max_weekly, end - lo);
      i = end;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const LoginRow& row = logins[i];
      const std::optional<double>& gap = gaps[i];
      SessionRecord r;
      r.user_id = user;
      char id[24];
      std::snprintf(id, sizeof(id), "c%05zu", i);
      r.session_id = id;
      r.modality = Modality::kContextual;
      r.wall_time = row.timestamp;
      r.profile = row.ip + "|" + row.device_type + "|" + row.user_agent;
      r.observations = contextual_detail::login_observations(
          row, geo,
          static_cast<double>(weekly[i]) / static_cast<double>(max_weekly), gap);
      out.push_back(std::move(r));
    }
  }
  return out;
}

inline std::optional<bool> parse_bool(std::string_view text) {
  const std::string s = csv::normalize_header(text);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  return std::nullopt;
}

// Header names are matched after normalization, so "Login Timestamp",
// "User ID" or "Round-Trip Time [ms]" are accepted as well.
inline std::vector<LoginRow> read_login_rows(std::istream& in) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, &line)) fail(ErrorCode::kMalformedRow, "login file is empty");
  const csv::Header h(row);
  const auto c_user = h.find({"user_id", "userid", "user"});
  const auto c_time = h.find({"timestamp", "login_timestamp", "time"});
  const auto c_ip = h.find({"ip", "ip_address"});
  const auto c_ua = h.find({"user_agent", "user_agent_string", "ua"});
  if (!c_user || !c_time || !c_ip || !c_ua) {
    fail(ErrorCode::kMalformedRow, "login header needs user_id, timestamp, ip, user_agent");
  }
  const auto c_device = h.find({"device_type", "device"});
  const auto c_browser = h.find({"browser_name_and_version", "browser", "browser_name"});
  const auto c_os = h.find({"os_name_and_version", "os", "os_name"});
  const auto c_browser_version = h.find({"browser_version"});
  const auto c_os_version = h.find({"os_version"});
  const auto c_country = h.find({"country"});
  const auto c_region = h.find({"region"});
  const auto c_city = h.find({"city"});
  const auto c_asn = h.find({"asn"});
  const auto c_rtt = h.find({"round_trip_time_ms", "rtt_ms", "rtt"});
  const auto c_attack = h.find({"is_attack_ip"});

  std::vector<LoginRow> out;
  while (csv::read_row(in, row, &line)) {
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;
    if (row.size() != h.size()) {
      fail(ErrorCode::kMalformedRow, "login line " + std::to_string(line) + ": " +
                                         std::to_string(row.size()) + " columns, expected " +
                                         std::to_string(h.size()));
    }
    auto col = [&](const std::optional<std::size_t>& c) {
      return c ? csv::trim(row[*c]) : std::string();
    };
    LoginRow r;
    r.user_id = col(c_user);
    const auto ts = parse_timestamp(row[*c_time]);
    if (r.user_id.empty() || !ts) {
      fail(ErrorCode::kMalformedRow,
           "login line " + std::to_string(line) + ": bad user id or timestamp");
    }
    r.timestamp = *ts;
    r.ip = col(c_ip);
    r.user_agent = col(c_ua);
    r.device_type = col(c_device);
    r.browser = col(c_browser);
    r.os = col(c_os);
    r.browser_version = col(c_browser_version);
    r.os_version = col(c_os_version);
    r.country = col(c_country);
    r.region = col(c_region);
    r.city = col(c_city);
    r.asn = col(c_asn);
    if (c_rtt) r.rtt_ms = csv::to_double(row[*c_rtt]);
    if (c_attack) r.is_attack_ip = parse_bool(row[*c_attack]);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SessionRecord> parse_contextual(std::istream& in, const GeoTable& geo) {
  return build_contextual(read_login_rows(in), geo);
}

inline std::vector<SessionRecord> parse_contextual_file(
    const std::filesystem::path& logins, const std::filesystem::path& geo_table) {
  const GeoTable geo = load_geo_table(geo_table);
  std::ifstream in(logins);
  if (!in) fail(ErrorCode::kIoError, "cannot open '" + logins.string() + "'");
  return parse_contextual(in, geo);
}

}  // namespace fedrisk
