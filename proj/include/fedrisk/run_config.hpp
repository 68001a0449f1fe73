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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedrisk/error.hpp"
#include "fedrisk/ingest/contextual.hpp"
#include "fedrisk/ingest/keystroke.hpp"
#include "fedrisk/ingest/mouse.hpp"
#include "fedrisk/ingest/synthetic.hpp"
#include "fedrisk/io/dataset_io.hpp"
#include "fedrisk/pipeline.hpp"

namespace fedrisk {

inline constexpr int kRunConfigSchemaVersion = 1;

// Exactly one of the inputs is set. Paths are resolved against the config
// file's directory.
struct DataSource {
  std::filesystem::path keystroke_csv;
  std::filesystem::path mouse_csv;
  std::filesystem::path mouse_dir;
  std::filesystem::path logins_csv;
  std::filesystem::path geo_csv;
  std::filesystem::path dataset;  // normalized file written by ingest
  std::filesystem::path truth;    // optional ground truth CSV
  std::optional<SynthProfile> synthetic;
};

struct RunConfig {
  PipelineConfig pipeline;
  DataSource data;
  std::size_t top_k = 5;
  std::map<std::string, double> decay_alpha;
  std::map<std::string, double> max_distance;
  std::vector<double> sweep_sigmas;
  std::string sweep_format = "csv";
  std::filesystem::path out_dir = "out";
};

namespace run_config_detail {

using Json = nlohmann::json;

inline void only_keys(const Json& obj, const std::string& where,
                      std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(ErrorCode::kConfigError, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      fail(ErrorCode::kConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read(const Json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline void read_path(const Json& obj, const char* key, const std::filesystem::path& base,
                      std::filesystem::path& out) {
  if (!obj.contains(key)) return;
  const std::filesystem::path p = obj.at(key).get<std::string>();
  out = p.is_absolute() ? p : base / p;
}

inline void check(bool ok, const std::string& message) {
  if (!ok) fail(ErrorCode::kConfigError, message);
}

}  // namespace run_config_detail

// Rejects out-of-range parameters and inconsistent data sources.
inline void validate(const RunConfig& c) {
  using run_config_detail::check;
  const PipelineConfig& p = c.pipeline;
  check(p.k == 2 || p.k == 3, "k must be 2 or 3");
  check(p.reference.radius >= 1, "radius must be at least 1");
  check(c.top_k >= 1, "top_k must be at least 1");
  check(p.rounds >= 1, "rounds must be at least 1");
  check(p.split_ratio > 0.0 && p.split_ratio < 1.0, "split_ratio must be in (0, 1)");
  check(p.stable_threshold >= 0.0 && p.stable_threshold <= 1.0,
        "stable_threshold must be in [0, 1]");
  check(p.train.max_iter >= 1, "max_iter must be at least 1");
  check(p.train.reg_lambda > 0.0 && std::isfinite(p.train.reg_lambda),
        "reg_lambda must be positive");
  check(p.train.learning_rate > 0.0, "learning_rate must be positive");
  check(p.train.convergence_tol > 0.0, "convergence_tol must be positive");
  check(p.dp.sigma >= 0.0 && std::isfinite(p.dp.sigma), "sigma must be finite and >= 0");
  check(p.dp.delta > 0.0 && p.dp.delta < 1.0, "delta must be in (0, 1)");
  check(p.dp.sensitivity > 0.0 && std::isfinite(p.dp.sensitivity),
        "sensitivity must be positive");
  check(p.jobs >= 1, "jobs must be at least 1");
  check(p.min_sessions >= 2, "min_sessions must be at least 2");
  check(p.exclusions.min_variance >= 0.0, "min_variance must be >= 0");
  for (const auto& [id, a] : c.decay_alpha) {
    check(a >= 0.0 && a <= 1.0, "decay_alpha for '" + id + "' must be in [0, 1]");
  }
  for (const auto& [id, d] : c.max_distance) {
    check(d > 0.0 && std::isfinite(d), "max_distance for '" + id + "' must be positive");
  }
  const DataSource& d = c.data;
  const int sources = !d.keystroke_csv.empty() + !d.mouse_csv.empty() + !d.mouse_dir.empty() +
                      !d.logins_csv.empty() + !d.dataset.empty() + d.synthetic.has_value();
  check(sources == 1, "exactly one data source must be configured");
  if (!d.keystroke_csv.empty()) check(p.modality == Modality::kKeystroke, "keystroke_csv needs modality keystroke");
  if (!d.mouse_csv.empty() || !d.mouse_dir.empty()) {
    check(p.modality == Modality::kMouse, "mouse input needs modality mouse");
  }
  if (!d.logins_csv.empty()) {
    check(p.modality == Modality::kContextual, "logins_csv needs modality contextual");
    if (d.geo_csv.empty()) fail(ErrorCode::kMissingGeoTable, "logins_csv needs geo_csv");
  }
  if (d.synthetic) {
    check(d.synthetic->users >= 1 && d.synthetic->sessions_per_user >= 1,
          "synthetic profile needs users and sessions_per_user >= 1");
    check(d.synthetic->anomaly_fraction >= 0.0 && d.synthetic->anomaly_fraction < 1.0,
          "anomaly_fraction must be in [0, 1)");
  }
  parse_report_format(c.sweep_format);
}

// Every referenced input must exist; the error names the path.
inline void check_inputs_exist(const RunConfig& c) {
  const DataSource& d = c.data;
  for (const auto* p : {&d.keystroke_csv, &d.mouse_csv, &d.mouse_dir, &d.logins_csv,
                        &d.geo_csv, &d.dataset, &d.truth}) {
    if (!p->empty() && !std::filesystem::exists(*p)) {
      fail(ErrorCode::kIoError, "no such file: '" + p->string() + "'");
    }
  }
}

// Parses a version 1 config document. Unknown keys are errors.
inline RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base) {
  using namespace run_config_detail;
  RunConfig c;
  try {
    const Json doc = Json::parse(text);
    only_keys(doc, "config", {"schema_version", "modality", "seed", "jobs", "data", "synthetic",
                              "similarity", "clustering", "training", "federation",
                              "exclusions", "sweep", "output"});
    if (!doc.contains("schema_version")) fail(ErrorCode::kConfigError, "missing schema_version");
    if (doc.at("schema_version").get<int>() != kRunConfigSchemaVersion) {
      fail(ErrorCode::kConfigError,
           "unsupported schema_version " + doc.at("schema_version").dump());
    }
    if (!doc.contains("modality")) fail(ErrorCode::kConfigError, "missing modality");
    PipelineConfig& p = c.pipeline;
    p.modality = parse_modality(doc.at("modality").get<std::string>());
    read(doc, "seed", p.seed);
    read(doc, "jobs", p.jobs);
    if (doc.contains("data")) {
      const Json& d = doc["data"];
      only_keys(d, "data", {"keystroke_csv", "mouse_csv", "mouse_dir", "logins_csv", "geo_csv",
                            "dataset", "truth"});
      read_path(d, "keystroke_csv", base, c.data.keystroke_csv);
      read_path(d, "mouse_csv", base, c.data.mouse_csv);
      read_path(d, "mouse_dir", base, c.data.mouse_dir);
      read_path(d, "logins_csv", base, c.data.logins_csv);
      read_path(d, "geo_csv", base, c.data.geo_csv);
      read_path(d, "dataset", base, c.data.dataset);
      read_path(d, "truth", base, c.data.truth);
    }
    if (doc.contains("synthetic")) {
      const Json& s = doc["synthetic"];
      only_keys(s, "synthetic", {"users", "sessions_per_user", "anomaly_fraction"});
      SynthProfile prof;
      read(s, "users", prof.users);
      read(s, "sessions_per_user", prof.sessions_per_user);
      read(s, "anomaly_fraction", prof.anomaly_fraction);
      c.data.synthetic = prof;
    }
    if (doc.contains("similarity")) {
      const Json& s = doc["similarity"];
      only_keys(s, "similarity", {"radius", "top_k", "decay_alpha", "max_distance",
                                  "dba_iterations", "default_dtw_scale"});
      read(s, "radius", p.reference.radius);
      read(s, "top_k", c.top_k);
      read(s, "decay_alpha", c.decay_alpha);
      read(s, "max_distance", c.max_distance);
      read(s, "dba_iterations", p.reference.dba_iterations);
      read(s, "default_dtw_scale", p.reference.default_dtw_scale);
    }
    if (doc.contains("clustering")) {
      const Json& s = doc["clustering"];
      only_keys(s, "clustering", {"k", "stable_k2", "stable_threshold", "max_iter"});
      read(s, "k", p.k);
      read(s, "stable_k2", p.stable_k2);
      read(s, "stable_threshold", p.stable_threshold);
      read(s, "max_iter", p.kmeans.max_iter);
    }
    if (doc.contains("training")) {
      const Json& s = doc["training"];
      only_keys(s, "training", {"max_iter", "reg_lambda", "learning_rate", "class_balanced",
                                "convergence_tol", "split_ratio", "min_sessions"});
      read(s, "max_iter", p.train.max_iter);
      read(s, "reg_lambda", p.train.reg_lambda);
      read(s, "learning_rate", p.train.learning_rate);
      read(s, "class_balanced", p.train.class_balanced);
      read(s, "convergence_tol", p.train.convergence_tol);
      read(s, "split_ratio", p.split_ratio);
      read(s, "min_sessions", p.min_sessions);
    }
    if (doc.contains("federation")) {
      const Json& s = doc["federation"];
      only_keys(s, "federation", {"rounds", "sigma", "delta", "sensitivity", "clip_updates"});
      read(s, "rounds", p.rounds);
      read(s, "sigma", p.dp.sigma);
      read(s, "delta", p.dp.delta);
      read(s, "sensitivity", p.dp.sensitivity);
      read(s, "clip_updates", p.clip_updates);
    }
    if (doc.contains("exclusions")) {
      const Json& s = doc["exclusions"];
      only_keys(s, "exclusions", {"enabled", "min_events", "min_variance", "min_profiles"});
      read(s, "enabled", p.exclusions_enabled);
      read(s, "min_events", p.exclusions.min_events);
      read(s, "min_variance", p.exclusions.min_variance);
      read(s, "min_profiles", p.exclusions.min_profiles);
    }
    if (doc.contains("sweep")) {
      const Json& s = doc["sweep"];
      only_keys(s, "sweep", {"sigmas", "format"});
      read(s, "sigmas", c.sweep_sigmas);
      read(s, "format", c.sweep_format);
    }
    if (doc.contains("output")) {
      const Json& s = doc["output"];
      only_keys(s, "output", {"dir"});
      read_path(s, "dir", base, c.out_dir);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kConfigError, std::string("malformed config: ") + e.what());
  }
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.parent_path());
}

// FEDRISK_SEED and FEDRISK_OUT; nothing else is read from the environment.
inline void apply_env_overrides(
    RunConfig& c, const std::function<const char*(const char*)>& getenv = std::getenv) {
  if (const char* s = getenv("FEDRISK_SEED"); s != nullptr && *s != '\0') {
    const auto v = csv::to_int(s);
    if (!v || *v < 0) fail(ErrorCode::kConfigError, "FEDRISK_SEED must be a non-negative integer");
    c.pipeline.seed = static_cast<std::uint64_t>(*v);
  }
  if (const char* s = getenv("FEDRISK_OUT"); s != nullptr && *s != '\0') c.out_dir = s;
}

// The modality schema with the configured per-feature overrides applied.
inline FeatureSchema resolve_schema(const RunConfig& c) {
  FeatureSchema schema = c.pipeline.modality == Modality::kMouse
                             ? mouse_schema(c.top_k)
                             : default_schema(c.pipeline.modality);
  auto find = [&](const std::string& id) -> FeatureSpec& {
    for (auto& s : schema) {
      if (s.id == id) return s;
    }
    fail(ErrorCode::kConfigError, "unknown feature '" + id + "' for modality " +
                                      std::string(modality_name(c.pipeline.modality)));
  };
  for (const auto& [id, a] : c.decay_alpha) find(id).decay_alpha = a;
  for (const auto& [id, d] : c.max_distance) find(id).max_distance = d;
  return schema;
}

// The pipeline settings for one run at the given sigma and noise seed.
inline PipelineConfig pipeline_config(const RunConfig& c, double sigma, std::uint64_t noise_seed) {
  PipelineConfig p = c.pipeline;
  p.schema = resolve_schema(c);
  p.dp.sigma = sigma;
  p.dp.seed = noise_seed;
  return p;
}

inline std::uint64_t run_noise_seed(const RunConfig& c) {
  return derive_seed(c.pipeline.seed, fnv1a64("noise"));
}

struct InputData {
  std::vector<SessionRecord> records;
  std::optional<GroundTruth> truth;
};

// Reads the configured source. Synthetic data uses the root seed.
inline InputData load_input(const RunConfig& c) {
  check_inputs_exist(c);
  const DataSource& d = c.data;
  InputData out;
  auto open = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(ErrorCode::kIoError, "cannot open '" + p.string() + "'");
    return in;
  };
  if (d.synthetic) {
    SynthProfile prof = *d.synthetic;
    prof.modality = c.pipeline.modality;
    prof.seed = c.pipeline.seed;
    SynthDataset ds = synth_generate(prof);
    out.records = std::move(ds.records);
    out.truth = std::move(ds.truth);
  } else if (!d.keystroke_csv.empty()) {
    auto in = open(d.keystroke_csv);
    out.records = parse_keystroke(in);
  } else if (!d.mouse_csv.empty()) {
    out.records = parse_mouse_file(d.mouse_csv);
  } else if (!d.mouse_dir.empty()) {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(d.mouse_dir)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      for (auto& r : parse_mouse_file(f)) out.records.push_back(std::move(r));
    }
  } else if (!d.logins_csv.empty()) {
    out.records = parse_contextual_file(d.logins_csv, d.geo_csv);
  } else if (!d.dataset.empty()) {
    auto in = open(d.dataset);
    std::ostringstream text;
    text << in.rdbuf();
    LoadedDataset ds = dataset_from_json(text.str());
    if (ds.modality != c.pipeline.modality) {
      fail(ErrorCode::kConfigError, "dataset '" + d.dataset.string() + "' holds " +
                                        std::string(modality_name(ds.modality)) + " sessions");
    }
    out.records = std::move(ds.records);
  }
  if (!d.truth.empty()) {
    auto in = open(d.truth);
    out.truth = truth_from_csv(in);
  }
  if (out.records.empty()) fail(ErrorCode::kConfigError, "the data source holds no sessions");
  return out;
}

}  // namespace fedrisk
