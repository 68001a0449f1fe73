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


// Writes the bundled test fixtures from the seeded synthetic generator, in
// the public corpora's file layouts.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fedrisk/ingest/csv.hpp"
#include "fedrisk/ingest/synthetic.hpp"
#include "fedrisk/io/dataset_io.hpp"

namespace {

namespace fs = std::filesystem;
using fedrisk::csv::Row;
using fedrisk::csv::write_row;

constexpr const char* kTimingColumns[] = {
    "H.period", "DD.period.t", "UD.period.t", "H.t", "DD.t.i", "UD.t.i", "H.i", "DD.i.e",
    "UD.i.e", "H.e", "DD.e.five", "UD.e.five", "H.five", "DD.five.Shift.r",
    "UD.five.Shift.r", "H.Shift.r", "DD.Shift.r.o", "UD.Shift.r.o", "H.o", "DD.o.a",
    "UD.o.a", "H.a", "DD.a.n", "UD.a.n", "H.n", "DD.n.l", "UD.n.l", "H.l", "DD.l.Return",
    "UD.l.Return", "H.Return"};

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string utc_stamp(std::int64_t t) {
  const std::chrono::sys_seconds s{std::chrono::seconds{t}};
  const auto day = std::chrono::floor<std::chrono::days>(s);
  const std::chrono::year_month_day ymd{day};
  const std::chrono::hh_mm_ss hms{s - day};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u %02lld:%02lld:%02lld",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()), static_cast<long long>(hms.hours().count()),
                static_cast<long long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

fedrisk::SynthDataset generate(fedrisk::Modality m, std::size_t users, std::size_t sessions) {
  fedrisk::SynthProfile p;
  p.modality = m;
  p.users = users;
  p.sessions_per_user = sessions;
  p.anomaly_fraction = 0.1;
  p.seed = 42;
  return fedrisk::synth_generate(p);
}

void keystroke(const fs::path& dir) {
  const auto ds = generate(fedrisk::Modality::kKeystroke, 5, 40);
  std::ostringstream out;
  Row header = {"subject", "sessionIndex", "rep"};
  for (const char* c : kTimingColumns) header.push_back(c);
  write_row(out, header);
  for (const auto& r : ds.keystroke_rows) {
    Row row = {r.subject, std::to_string(r.session_index), std::to_string(r.rep)};
    for (double t : r.timings) row.push_back(fixed(t, 4));
    write_row(out, row);
  }
  write(dir / "keystroke.csv", out.str());
  write(dir / "keystroke_truth.csv", fedrisk::truth_to_csv(ds.truth));
}

void mouse(const fs::path& dir) {
  const auto ds = generate(fedrisk::Modality::kMouse, 3, 15);
  std::ostringstream out;
  write_row(out, {"user_id", "session_id", "record timestamp", "client timestamp", "button",
                  "state", "x", "y"});
  for (const auto& s : ds.mouse_sessions) {
    for (const auto& e : s.events) {
      write_row(out, {s.user_id, s.session_id, fixed(e.t, 3), fixed(e.t, 3), "NoButton", "Move",
                      fixed(*e.x, 0), fixed(*e.y, 0)});
    }
  }
  write(dir / "mouse.csv", out.str());
  write(dir / "mouse_truth.csv", fedrisk::truth_to_csv(ds.truth));
}

void contextual(const fs::path& dir) {
  const auto ds = generate(fedrisk::Modality::kContextual, 10, 20);
  std::ostringstream out;
  write_row(out, {"index", "Login Timestamp", "User ID", "Round-Trip Time [ms]", "IP Address",
                  "User Agent String", "Device Type", "Login Successful", "Is Attack IP"});
  std::size_t index = 0;
  for (const auto& l : ds.logins) {
    write_row(out, {std::to_string(index++), utc_stamp(l.timestamp), l.user_id,
                    l.rtt_ms ? fixed(*l.rtt_ms, 0) : "", l.ip, l.user_agent, l.device_type,
                    "True", l.is_attack_ip.value_or(false) ? "True" : "False"});
  }
  write(dir / "logins.csv", out.str());
  std::ostringstream geo;
  write_row(geo, {"ip_prefix", "lat", "lon", "asn", "country", "region", "city", "asn_category"});
  for (const auto& e : ds.geo.entries()) {
    write_row(geo, {e.ip_prefix, fixed(e.lat_deg, 4), fixed(e.lon_deg, 4), e.asn, e.country,
                    e.region, e.city, e.asn_category});
  }
  write(dir / "geo.csv", geo.str());
  write(dir / "contextual_truth.csv", fedrisk::truth_to_csv(ds.truth));
}

// Seeded 12-point instances for the k = 3 clustering oracle: three clouds
// with centres at least 0.35 apart in [0, 1]^3, every cloud at least two
// points.
void clusters(const fs::path& dir) {
  nlohmann::ordered_json instances = nlohmann::ordered_json::array();
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(0.1, 0.9);
    std::uniform_real_distribution<double> jitter(-0.06, 0.06);
    std::vector<std::array<double, 3>> centres;
    while (centres.size() < 3) {
      const std::array<double, 3> c = {centre(rng), centre(rng), centre(rng)};
      bool far = true;
      for (const auto& o : centres) {
        double d2 = 0.0;
        for (int i = 0; i < 3; ++i) d2 += (c[i] - o[i]) * (c[i] - o[i]);
        far = far && d2 >= 0.35 * 0.35;
      }
      if (far) centres.push_back(c);
    }
    std::uniform_int_distribution<int> first(2, 8);
    const int n0 = first(rng);
    const int n1 = std::uniform_int_distribution<int>(2, 10 - n0)(rng);
    const int counts[3] = {n0, n1, 12 - n0 - n1};
    nlohmann::ordered_json points = nlohmann::ordered_json::array();
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < counts[c]; ++i) {
        std::vector<double> p(3);
        for (int d = 0; d < 3; ++d) {
          p[d] = std::round(std::clamp(centres[c][d] + jitter(rng), 0.0, 1.0) * 1e4) / 1e4;
        }
        points.push_back(p);
      }
    }
    instances.push_back({{"seed", seed}, {"points", points}});
  }
  nlohmann::ordered_json doc;
  doc["k"] = 3;
  doc["instances"] = std::move(instances);
  write(dir / "clusters12.json", doc.dump(1) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: fedrisk_make_fixtures <dir>\n";
    return 2;
  }
  const fs::path dir = argv[1];
  fs::create_directories(dir);
  keystroke(dir);
  mouse(dir);
  contextual(dir);
  clusters(dir);
  return 0;
}
