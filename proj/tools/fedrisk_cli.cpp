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


#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fedrisk/evaluation.hpp"
#include "fedrisk/io/dataset_io.hpp"
#include "fedrisk/io/model_file.hpp"
#include "fedrisk/pipeline.hpp"
#include "fedrisk/run_config.hpp"

namespace {

namespace fs = std::filesystem;
using fedrisk::ErrorCode;
using fedrisk::RunConfig;
using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitPipeline = 1;
constexpr int kExitConfig = 2;

constexpr const char* kModelFile = "global_model.fedrisk";
constexpr const char* kKeyFile = "model.key";
constexpr const char* kAuditFile = "audit.jsonl";

struct CommonOptions {
  std::string config;
  std::optional<std::string> modality;
  bool synthetic = false;
  std::optional<std::size_t> users;
  std::optional<std::size_t> sessions;
  std::optional<double> anomaly_fraction;
  std::string dataset;
  std::string truth;
  std::string keystroke;
  std::string mouse;
  std::string mouse_dir;
  std::string logins;
  std::string geo;
  std::optional<std::uint64_t> seed;
  std::optional<double> sigma;
  std::optional<int> rounds;
  std::optional<int> k;
  std::optional<std::size_t> radius;
  std::optional<std::size_t> top_k;
  std::optional<double> lambda;
  std::optional<std::size_t> jobs;
  std::optional<std::string> out;
  bool no_exclusions = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config, "Run configuration (JSON)");
  cmd->add_option("--modality", o.modality, "keystroke, mouse or contextual");
  cmd->add_flag("--synthetic", o.synthetic, "Use the synthetic data profile");
  cmd->add_option("--users", o.users, "Synthetic users");
  cmd->add_option("--sessions", o.sessions, "Synthetic sessions per user");
  cmd->add_option("--anomaly-fraction", o.anomaly_fraction, "Synthetic anomaly fraction");
  cmd->add_option("--dataset", o.dataset, "Normalized dataset written by ingest");
  cmd->add_option("--truth", o.truth, "Ground truth CSV");
  cmd->add_option("--keystroke", o.keystroke, "Keystroke timing CSV");
  cmd->add_option("--mouse", o.mouse, "Mouse event CSV");
  cmd->add_option("--mouse-dir", o.mouse_dir, "Directory of per-user mouse sessions");
  cmd->add_option("--logins", o.logins, "Login history CSV");
  cmd->add_option("--geo", o.geo, "IP geolocation table CSV");
  cmd->add_option("--seed", o.seed, "Root seed");
  cmd->add_option("--sigma", o.sigma, "Gaussian noise scale");
  cmd->add_option("--rounds", o.rounds, "Federation rounds");
  cmd->add_option("--k", o.k, "Risk clusters (2 or 3)");
  cmd->add_option("--radius", o.radius, "FastDTW radius");
  cmd->add_option("--top-k", o.top_k, "Top-k references for sequence features");
  cmd->add_option("--lambda", o.lambda, "L2 regularization strength");
  cmd->add_option("--jobs", o.jobs, "Worker threads");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_flag("--no-exclusions", o.no_exclusions, "Keep every user");
}

// File values first, then FEDRISK_SEED / FEDRISK_OUT, then flags.
RunConfig build_config(const CommonOptions& o) {
  RunConfig c;
  if (!o.config.empty()) {
    if (!fs::exists(o.config)) {
      fedrisk::fail(ErrorCode::kIoError, "no such file: '" + o.config + "'");
    }
    c = fedrisk::load_run_config(o.config);
  } else if (!o.modality) {
    fedrisk::fail(ErrorCode::kConfigError, "--modality is required without --config");
  }
  if (o.modality) c.pipeline.modality = fedrisk::parse_modality(*o.modality);
  fedrisk::apply_env_overrides(c);

  const bool data_flag = o.synthetic || !o.dataset.empty() || !o.keystroke.empty() ||
                         !o.mouse.empty() || !o.mouse_dir.empty() || !o.logins.empty();
  if (data_flag) {
    const fs::path truth = c.data.truth;
    c.data = {};
    c.data.truth = truth;
    if (o.synthetic) c.data.synthetic = fedrisk::SynthProfile{};
    c.data.dataset = o.dataset;
    c.data.keystroke_csv = o.keystroke;
    c.data.mouse_csv = o.mouse;
    c.data.mouse_dir = o.mouse_dir;
    c.data.logins_csv = o.logins;
  }
  if (!o.geo.empty()) c.data.geo_csv = o.geo;
  if (!o.truth.empty()) c.data.truth = o.truth;
  if (c.data.synthetic) {
    if (o.users) c.data.synthetic->users = *o.users;
    if (o.sessions) c.data.synthetic->sessions_per_user = *o.sessions;
    if (o.anomaly_fraction) c.data.synthetic->anomaly_fraction = *o.anomaly_fraction;
  }
  auto& p = c.pipeline;
  if (o.seed) p.seed = *o.seed;
  if (o.sigma) p.dp.sigma = *o.sigma;
  if (o.rounds) p.rounds = *o.rounds;
  if (o.k) p.k = *o.k;
  if (o.radius) p.reference.radius = *o.radius;
  if (o.top_k) c.top_k = *o.top_k;
  if (o.lambda) p.train.reg_lambda = *o.lambda;
  if (o.jobs) p.jobs = *o.jobs;
  if (o.out) c.out_dir = *o.out;
  if (o.no_exclusions) p.exclusions_enabled = false;
  fedrisk::validate(c);
  return c;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fedrisk::fail(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) fedrisk::fail(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  if (!fs::exists(path)) fedrisk::fail(ErrorCode::kIoError, "no such file: '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  if (!in) fedrisk::fail(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void make_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fedrisk::fail(ErrorCode::kIoError, "cannot create '" + dir.string() + "': " + ec.message());
}

Json number_or_inf(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

std::string audit_jsonl(const std::vector<fedrisk::AuditRecord>& audit) {
  std::string out;
  for (const auto& a : audit) {
    Json j;
    j["round"] = a.round;
    j["user_id"] = a.user_id;
    j["accepted"] = a.accepted;
    j["reason"] = fedrisk::verify_reason_name(a.reason);
    j["sigma"] = a.sigma;
    j["epsilon_cumulative"] = a.epsilon_cumulative;
    out += j.dump() + "\n";
  }
  return out;
}

std::string predictions_csv(const std::vector<fedrisk::SessionPrediction>& predictions) {
  std::ostringstream out;
  fedrisk::csv::write_row(out, {"user_id", "session_id", "risk", "p_high"});
  for (const auto& p : predictions) {
    fedrisk::csv::write_row(out, {p.user_id, p.session_id,
                                  std::string(fedrisk::risk_level_name(p.risk)),
                                  fedrisk::format_g6(p.p_high)});
  }
  return out.str();
}

Json exclusions_json(const fedrisk::ExclusionReport& report) {
  Json arr = Json::array();
  for (const auto& e : report.excluded) {
    arr.push_back({{"user_id", e.user_id}, {"rule", e.rule}, {"detail", e.detail}});
  }
  return arr;
}

std::string metrics_document(const RunConfig& c, const fedrisk::PipelineResult& r,
                             std::size_t sessions) {
  const auto& p = c.pipeline;
  Json doc;
  doc["modality"] = fedrisk::modality_name(p.modality);
  doc["seed"] = p.seed;
  doc["sigma"] = p.dp.sigma;
  doc["delta"] = p.dp.delta;
  doc["rounds"] = p.rounds;
  doc["epsilon_per_round"] = number_or_inf(fedrisk::sweep_epsilon(p.dp.sigma, p.dp));
  doc["epsilon_cumulative"] = p.dp.sigma > 0.0
                                  ? Json(r.federation.global.cumulative_epsilon())
                                  : Json("inf");
  doc["sessions"] = sessions;
  doc["retained_users"] = r.exclusions.retained.size();
  doc["excluded"] = exclusions_json(r.exclusions);
  Json users = Json::array();
  for (const auto& u : r.users) {
    Json labels = Json::object();
    for (const auto& [level, n] : u.label_counts) labels[std::string(fedrisk::risk_level_name(level))] = n;
    users.push_back({{"user_id", u.user_id},
                     {"sessions", u.sessions},
                     {"train", u.train},
                     {"test", u.test},
                     {"k", u.k},
                     {"stable", u.stable},
                     {"eligible", u.eligible},
                     {"note", u.note},
                     {"labels", labels}});
  }
  doc["users"] = std::move(users);
  Json rounds = Json::array();
  for (const auto& h : r.federation.global.history) rounds.push_back(h.participants);
  doc["participants_per_round"] = std::move(rounds);
  doc["predictions"] = r.predictions.size();
  doc["metrics"] = r.metrics ? fedrisk::metrics_json(*r.metrics) : Json(nullptr);
  return doc.dump(2) + "\n";
}

void print_error(const std::exception& e) { std::cerr << "fedrisk: " << e.what() << "\n"; }

struct Loaded {
  RunConfig config;
  fedrisk::InputData data;
};

Loaded load(const CommonOptions& o) {
  Loaded l;
  l.config = build_config(o);
  l.data = fedrisk::load_input(l.config);
  return l;
}

int cmd_ingest(const CommonOptions& o) {
  Loaded l;
  try {
    l = load(o);
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  const RunConfig& c = l.config;
  const auto pcfg = fedrisk::pipeline_config(c, c.pipeline.dp.sigma, fedrisk::run_noise_seed(c));
  std::map<std::string, std::vector<fedrisk::SessionRecord>> by_user;
  for (const auto& r : l.data.records) {
    if (r.modality != pcfg.modality) {
      std::cerr << "fedrisk: record '" << r.session_id << "' has the wrong modality\n";
      return kExitConfig;
    }
    by_user[r.user_id].push_back(r);
  }
  fedrisk::ExclusionReport report;
  try {
    report = fedrisk::run_exclusions(by_user, pcfg.schema, pcfg);
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitPipeline;
  }

  std::cout << "modality " << fedrisk::modality_name(pcfg.modality) << "\n";
  std::cout << "users " << by_user.size() << "\n";
  std::cout << "sessions " << l.data.records.size() << "\n";
  for (const auto& [u, rs] : by_user) std::cout << "  user " << u << " " << rs.size() << "\n";
  std::cout << "excluded " << report.excluded.size() << "\n";
  for (const auto& e : report.excluded) {
    std::cout << "  excluded " << e.user_id << " " << e.rule << ": " << e.detail << "\n";
  }
  std::cout << "retained " << report.retained.size() << "\n";

  const std::set<std::string> keep(report.retained.begin(), report.retained.end());
  std::vector<fedrisk::SessionRecord> retained;
  for (const auto& r : l.data.records) {
    if (keep.contains(r.user_id)) retained.push_back(r);
  }
  try {
    make_out_dir(c.out_dir);
    write_file(c.out_dir / "dataset.json", fedrisk::dataset_to_json(pcfg.modality, retained));
    if (l.data.truth) {
      fedrisk::GroundTruth kept;
      for (const auto& [key, v] : *l.data.truth) {
        if (keep.contains(key.first)) kept[key] = v;
      }
      write_file(c.out_dir / "truth.csv", fedrisk::truth_to_csv(kept));
    }
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  return kExitOk;
}

int cmd_run(const CommonOptions& o, const std::string& key_file) {
  Loaded l;
  fedrisk::MacKey key{};
  try {
    l = load(o);
    key = key_file.empty() ? fedrisk::model_key_for_seed(l.config.pipeline.seed)
                           : fedrisk::parse_key_hex(read_file(key_file));
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  const RunConfig& c = l.config;
  fedrisk::PipelineResult result;
  try {
    const auto pcfg =
        fedrisk::pipeline_config(c, c.pipeline.dp.sigma, fedrisk::run_noise_seed(c));
    result = fedrisk::run_pipeline(l.data.records, pcfg, l.data.truth ? &*l.data.truth : nullptr);
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitPipeline;
  }

  const std::string audit = audit_jsonl(result.federation.audit);
  fedrisk::StoredModel stored;
  stored.modality = fedrisk::modality_name(c.pipeline.modality);
  stored.model = result.global_model;
  stored.round = result.federation.global.round;
  stored.history = result.federation.global.history;
  stored.audit_sha256 = fedrisk::to_hex(fedrisk::sha256(fedrisk::to_bytes(audit)));
  try {
    make_out_dir(c.out_dir);
    write_file(c.out_dir / "metrics.json", metrics_document(c, result, l.data.records.size()));
    write_file(c.out_dir / "predictions.csv", predictions_csv(result.predictions));
    write_file(c.out_dir / kAuditFile, audit);
    write_file(c.out_dir / kModelFile, fedrisk::write_model_file(stored, key));
    if (key_file.empty()) write_file(c.out_dir / kKeyFile, fedrisk::to_hex(key) + "\n");
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }

  std::cout << "modality " << stored.modality << "\n";
  std::cout << "users " << result.users.size() << " retained, " << result.exclusions.excluded.size()
            << " excluded\n";
  std::cout << "rounds " << stored.round << "\n";
  std::cout << "test sessions " << result.predictions.size() << "\n";
  if (result.metrics) {
    const auto& m = *result.metrics;
    std::cout << "accuracy " << fedrisk::format_g6(m.accuracy) << "\n";
    std::cout << "precision_high " << fedrisk::format_g6(m.per_class[0].precision) << "\n";
    std::cout << "recall_high " << fedrisk::format_g6(m.per_class[0].recall) << "\n";
  }
  return kExitOk;
}

std::vector<double> parse_sigma_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string token;
  while (std::getline(in, token, ',')) {
    const auto v = fedrisk::csv::to_double(token);
    if (!v) fedrisk::fail(ErrorCode::kConfigError, "bad sigma value '" + token + "'");
    out.push_back(*v);
  }
  return out;
}

int cmd_sweep(const CommonOptions& o, const std::optional<std::string>& sigmas_text,
              const std::optional<std::string>& format_text) {
  Loaded l;
  std::vector<double> sigmas;
  fedrisk::ReportFormat format{};
  try {
    l = load(o);
    sigmas = sigmas_text ? parse_sigma_list(*sigmas_text) : l.config.sweep_sigmas;
    fedrisk::validate_sigmas(sigmas);
    format = fedrisk::parse_report_format(format_text.value_or(l.config.sweep_format));
    if (!l.data.truth) {
      fedrisk::fail(ErrorCode::kConfigError, "sweep needs ground truth (--truth or --synthetic)");
    }
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  const RunConfig& c = l.config;
  fedrisk::SweepResult result;
  try {
    const auto base = fedrisk::pipeline_config(c, 0.0, 0);
    result = fedrisk::dp_sweep(
        std::string(fedrisk::modality_name(c.pipeline.modality)), sigmas,
        fedrisk::run_noise_seed(c), base.dp, [&](double sigma, std::uint64_t noise_seed) {
          const auto r = fedrisk::run_pipeline(l.data.records,
                                               fedrisk::pipeline_config(c, sigma, noise_seed),
                                               &*l.data.truth);
          return *r.metrics;
        });
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitPipeline;
  }
  const std::string report = fedrisk::emit_report(result, format);
  const char* ext = format == fedrisk::ReportFormat::kCsv    ? "csv"
                    : format == fedrisk::ReportFormat::kJson ? "json"
                                                             : "md";
  try {
    make_out_dir(c.out_dir);
    write_file(c.out_dir / (std::string("sweep.") + ext), report);
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  std::cout << report;
  return kExitOk;
}

int cmd_verify(const std::string& model_path, const std::string& audit_path,
               const std::string& key_path) {
  std::string model;
  std::string audit;
  fedrisk::MacKey key{};
  try {
    model = read_file(model_path);
    if (!audit_path.empty()) audit = read_file(audit_path);
    const fs::path kp =
        key_path.empty() ? fs::path(model_path).parent_path() / kKeyFile : fs::path(key_path);
    key = fedrisk::parse_key_hex(read_file(kp));
  } catch (const fedrisk::Error& e) {
    print_error(e);
    return kExitConfig;
  }
  const auto verdict =
      fedrisk::verify_model_file(model, key, audit_path.empty() ? nullptr : &audit);
  if (!verdict.ok) {
    std::cout << "FAIL " << verdict.reason << "\n";
    return kExitPipeline;
  }
  std::cout << "PASS model tag verified" << (audit_path.empty() ? "" : ", audit log matches")
            << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated behavioural risk scoring"};
  app.require_subcommand(1);

  CommonOptions ingest_opts;
  auto* ingest = app.add_subcommand("ingest", "Parse inputs, apply exclusions, write dataset.json");
  add_common(ingest, ingest_opts);

  CommonOptions run_opts;
  std::string run_key;
  auto* run = app.add_subcommand("run", "Train, federate and evaluate");
  add_common(run, run_opts);
  run->add_option("--key-file", run_key, "Hex model key; default derives one from the seed");

  CommonOptions sweep_opts;
  std::optional<std::string> sweep_sigmas;
  std::optional<std::string> sweep_format;
  auto* sweep = app.add_subcommand("sweep", "Evaluate across noise scales");
  add_common(sweep, sweep_opts);
  sweep->add_option("--sigmas", sweep_sigmas, "Comma-separated, strictly increasing");
  sweep->add_option("--format", sweep_format, "csv, json or markdown");

  std::string verify_model;
  std::string verify_audit;
  std::string verify_key;
  auto* verify = app.add_subcommand("verify", "Check a stored model's tag");
  verify->add_option("model", verify_model, "Model file")->required();
  verify->add_option("--audit", verify_audit, "Audit log the model must match");
  verify->add_option("--key-file", verify_key, "Hex model key; default model.key beside the model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*ingest) return cmd_ingest(ingest_opts);
    if (*run) return cmd_run(run_opts, run_key);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_sigmas, sweep_format);
    if (*verify) return cmd_verify(verify_model, verify_audit, verify_key);
  } catch (const std::exception& e) {
    print_error(e);
    return kExitPipeline;
  }
  return kExitConfig;
}
