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

// Offline IP-prefix geolocation table.
//
// CSV header: ip_prefix,lat,lon,asn,country with optional region, city and
// asn_category columns. Lookups pick the longest matching string prefix.

#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

inline GeoPoint geo_from_degrees(double lat_deg, double lon_deg) {
  constexpr double kToRad = std::numbers::pi / 180.0;
  return {lat_deg * kToRad, lon_deg * kToRad};
}

struct GeoEntry {
  std::string ip_prefix;
  double lat_deg = 0.0;
  double lon_deg = 0.0;
  std::string asn;
  std::string country;
  std::string region;
  std::string city;
  std::string asn_category;
};

class GeoTable {
 public:
  GeoTable() = default;
  explicit GeoTable(std::vector<GeoEntry> entries) : entries_(std::move(entries)) {}

  std::size_t size() const { return entries_.size(); }
  const std::vector<GeoEntry>& entries() const { return entries_; }

  const GeoEntry* lookup(std::string_view ip) const {
    const GeoEntry* best = nullptr;
    for (const auto& e : entries_) {
      if (e.ip_prefix.empty() || !ip.starts_with(e.ip_prefix)) continue;
      if (best == nullptr || e.ip_prefix.size() > best->ip_prefix.size()) best = &e;
    }
    return best;
  }

 private:
  std::vector<GeoEntry> entries_;
};

inline GeoTable read_geo_table(std::istream& in) {
  csv::Row row;
  std::size_t line = 0;
  if (!csv::read_row(in, row, &line)) {
    fail(ErrorCode::kMissingGeoTable, "geo table is empty");
  }
  const csv::Header header(row);
  const auto c_prefix = header.find({"ip_prefix", "prefix"});
  const auto c_lat = header.find({"lat", "latitude"});
  const auto c_lon = header.find({"lon", "lng", "longitude"});
  const auto c_asn = header.find({"asn"});
  const auto c_country = header.find({"country"});
  if (!c_prefix || !c_lat || !c_lon || !c_asn || !c_country) {
    fail(ErrorCode::kMalformedRow,
         "geo table header needs ip_prefix,lat,lon,asn,country");
  }
  const auto c_region = header.find({"region"});
  const auto c_city = header.find({"city"});
  const auto c_category = header.find({"asn_category", "category"});

  std::vector<GeoEntry> entries;
  while (csv::read_row(in, row, &line)) {
    if (row.size() == 1 && csv::trim(row[0]).empty()) continue;
    if (row.size() != header.size()) {
      fail(ErrorCode::kMalformedRow, "geo table line " + std::to_string(line) +
                                         ": wrong column count");
    }
    GeoEntry e;
    e.ip_prefix = csv::trim(row[*c_prefix]);
    const auto lat = csv::to_double(row[*c_lat]);
    const auto lon = csv::to_double(row[*c_lon]);
    if (e.ip_prefix.empty() || !lat || !lon || *lat < -90.0 || *lat > 90.0 ||
        *lon < -180.0 || *lon > 180.0) {
      fail(ErrorCode::kMalformedRow,
           "geo table line " + std::to_string(line) + ": bad prefix or coordinates");
    }
    e.lat_deg = *lat;
    e.lon_deg = *lon;
    e.asn = csv::trim(row[*c_asn]);
    e.country = csv::trim(row[*c_country]);
    if (c_region) e.region = csv::trim(row[*c_region]);
    if (c_city) e.city = csv::trim(row[*c_city]);
    if (c_category) e.asn_category = csv::trim(row[*c_category]);
    entries.push_back(std::move(e));
  }
  return GeoTable(std::move(entries));
}

inline GeoTable load_geo_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kMissingGeoTable, "cannot open '" + path.string() + "'");
  return read_geo_table(in);
}

}  // namespace fedrisk
