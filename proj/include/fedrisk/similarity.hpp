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

// Per-feature similarity scores. Every function here maps a (reference, live)
// pair onto [0, 1], where 1 means "indistinguishable from the reference".

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fedrisk/error.hpp"

namespace fedrisk {

using StringSet = std::set<std::string>;

inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lat_rad = 0.0;
  double lon_rad = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

inline double clamp01(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, 0.0, 1.0);
}

inline void check_same_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    fail(ErrorCode::kDimensionMismatch, std::string(what) + ": " +
                                            std::to_string(a) + " vs " +
                                            std::to_string(b));
  }
}

template <typename T>
double sim_binary(const T& ref, const T& live) {
  return ref == live ? 1.0 : 0.0;
}

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Raw cosine lives in [-1, 1]; anti-aligned vectors are treated as "no
// similarity" so the result stays in [0, 1].
inline double sim_cosine(std::span<const double> ref,
                         std::span<const double> live) {
  check_same_dim(ref.size(), live.size(), "sim_cosine");
  const double nr = norm2(ref);
  const double nl = norm2(live);
  if (nr == 0.0 || nl == 0.0) {
    fail(ErrorCode::kZeroNormVector, "sim_cosine: zero-norm input");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) dot += ref[i] * live[i];
  return clamp01(dot / (nr * nl));
}

inline double sim_set_member(const std::string& live,
                             const StringSet& reference_set) {
  return reference_set.contains(live) ? 1.0 : 0.0;
}

inline void check_geo(const GeoPoint& p) {
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (!std::isfinite(p.lat_rad) || !std::isfinite(p.lon_rad) ||
      p.lat_rad < -kHalfPi || p.lat_rad > kHalfPi ||
      p.lon_rad < -std::numbers::pi || p.lon_rad > std::numbers::pi) {
    fail(ErrorCode::kInvalidCoordinate,
         "coordinate out of range: (" + std::to_string(p.lat_rad) + ", " +
             std::to_string(p.lon_rad) + ")");
  }
}

// Great-circle distance in the unit of `earth_radius`.
inline double haversine(const GeoPoint& p1, const GeoPoint& p2,
                        double earth_radius = kEarthRadiusKm) {
  check_geo(p1);
  check_geo(p2);
  if (!(earth_radius > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "earth radius must be positive");
  }
  const double dphi = p2.lat_rad - p1.lat_rad;
  const double dlambda = p2.lon_rad - p1.lon_rad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(p1.lat_rad) * std::cos(p2.lat_rad) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * earth_radius * std::asin(std::sqrt(h));
}

inline double sim_distance_normalized(double distance, double max_distance) {
  if (!(max_distance > 0.0)) {
    fail(ErrorCode::kNonPositiveMaxDistance,
         "max distance must be positive, got " + std::to_string(max_distance));
  }
  return clamp01(1.0 - distance / max_distance);
}

// Version drift: 1 - |live - ref| / max(live, ref). Two zero versions are
// equal versions.
inline double sim_version(double ref, double live) {
  const double hi = std::max(ref, live);
  if (hi <= 0.0) return 1.0;
  return clamp01(1.0 - std::abs(live - ref) / hi);
}

inline double sim_jaccard(const StringSet& ref, const StringSet& live) {
  if (ref.empty() && live.empty()) return 1.0;
  std::size_t inter = 0;
  for (const auto& s : live) inter += ref.contains(s) ? 1 : 0;
  const std::size_t uni = ref.size() + live.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

// Cen_new = alpha * Cen_hist + (1 - alpha) * live, element-wise.
inline std::vector<double> decay_update(std::span<const double> hist_centroid,
                                        std::span<const double> live,
                                        double alpha) {
  check_same_dim(hist_centroid.size(), live.size(), "decay_update");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    fail(ErrorCode::kAlphaOutOfRange,
         "alpha must be in [0,1], got " + std::to_string(alpha));
  }
  std::vector<double> out(hist_centroid.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (alpha == 1.0) {
      out[i] = hist_centroid[i];
    } else if (alpha == 0.0) {
      out[i] = live[i];
    } else {
      out[i] = alpha * hist_centroid[i] + (1.0 - alpha) * live[i];
    }
  }
  return out;
}

// Distance between two hours-of-day on a 24h clock, in hours, in [0, 12].
inline double circular_hour_distance(double a_hours, double b_hours) {
  double d = std::fmod(std::abs(a_hours - b_hours), 24.0);
  return std::min(d, 24.0 - d);
}

}  // namespace fedrisk
