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


#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedrisk/io/dataset_io.hpp"
#include "fedrisk/io/model_file.hpp"
#include "fedrisk/run_config.hpp"
#include "gtest/gtest.h"
#include "test_util.hpp"

namespace fedrisk {
namespace {

namespace fs = std::filesystem;
using testing::code_of;

const fs::path kFixtures = FEDRISK_FIXTURES;

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + FEDRISK_CLI + " " + args + " 2>&1";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  while (const std::size_t n = fread(buf, 1, sizeof(buf), pipe)) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("fedrisk_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string quoted(const fs::path& p) { return "'" + p.string() + "'"; }

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

TEST(CliIngest, KeystrokeFixtureListsFiveUsers) {
  const fs::path out = fresh_dir("ingest_ks");
  const auto r = run_cli("ingest -c " + quoted(kFixtures / "keystroke.json") + " --out " + quoted(out));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("users 5\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("sessions 200\n"), std::string::npos);
  int listed = 0;
  for (const auto& line : lines_of(r.output)) listed += line.starts_with("  user ") ? 1 : 0;
  EXPECT_EQ(listed, 5);
  const auto ds = dataset_from_json(slurp(out / "dataset.json"));
  EXPECT_EQ(ds.modality, Modality::kKeystroke);
  EXPECT_EQ(ds.records.size(), 200u);
  EXPECT_TRUE(fs::exists(out / "truth.csv"));
}

TEST(CliIngest, ReportsExcludedUsers) {
  const fs::path dir = fresh_dir("ingest_excl");
  std::string logins = slurp(kFixtures / "logins.csv");
  for (int i = 0; i < 4; ++i) {
    logins += "9" + std::to_string(i) +
              ",2020-03-01 10:00:00,frozen,30,81.10.1.1,Mozilla/5.0 (X11; Linux x86_64) "
              "Firefox/107.0,desktop,True,False\n";
  }
  spit(dir / "logins.csv", logins);
  const auto r = run_cli("ingest --modality contextual --logins " + quoted(dir / "logins.csv") +
                         " --geo " + quoted(kFixtures / "geo.csv") + " --out " + quoted(dir));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("users 11\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("excluded 1\n"), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("excluded frozen "), std::string::npos) << r.output;
  EXPECT_NE(r.output.find("retained 10\n"), std::string::npos) << r.output;
  EXPECT_EQ(dataset_from_json(slurp(dir / "dataset.json")).records.size(), 200u);
}

TEST(CliIngest, MissingFileExitsTwoAndNamesPath) {
  const auto r = run_cli("ingest --modality keystroke --keystroke /no/such/timings.csv");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("/no/such/timings.csv"), std::string::npos) << r.output;
  const auto c = run_cli("run -c /no/such/config.json");
  EXPECT_EQ(c.exit_code, 2);
  EXPECT_NE(c.output.find("/no/such/config.json"), std::string::npos) << c.output;
}

TEST(CliIngest, SyntheticProfileIsDeterministic) {
  const fs::path a = fresh_dir("synth_a");
  const fs::path b = fresh_dir("synth_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(run_cli("ingest --modality mouse --synthetic --users 4 --sessions 12 --out " + quoted(d))
                  .exit_code,
              0);
  }
  EXPECT_EQ(slurp(a / "dataset.json"), slurp(b / "dataset.json"));
  EXPECT_EQ(slurp(a / "truth.csv"), slurp(b / "truth.csv"));
}

TEST(CliUsage, BadInvocationsExitTwo) {
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
  EXPECT_EQ(run_cli("run --modality keystroke --synthetic --rounds notanumber").exit_code, 2);
  EXPECT_EQ(run_cli("run --synthetic").exit_code, 2);
  EXPECT_EQ(run_cli("run --modality keystroke").exit_code, 2);
  EXPECT_EQ(run_cli("run --modality keystroke --synthetic --k 5").exit_code, 2);
  EXPECT_EQ(run_cli("run --modality keystroke --synthetic --sigma -1").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
}

TEST(CliRun, PipelineFailureExitsOne) {
  const fs::path out = fresh_dir("run_fail");
  const auto r = run_cli("run --modality keystroke --synthetic --users 2 --sessions 3 --out " +
                         quoted(out));
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("stage federation"), std::string::npos) << r.output;
}

TEST(CliRun, WritesOutputsThatVerify) {
  const fs::path out = fresh_dir("run_outputs");
  const auto r = run_cli("run -c " + quoted(kFixtures / "contextual.json") + " --out " + quoted(out));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  for (const char* f : {"metrics.json", "predictions.csv", "audit.jsonl", "global_model.fedrisk",
                        "model.key"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  EXPECT_EQ(metrics["rounds"], 3);
  EXPECT_EQ(metrics["participants_per_round"].size(), 3u);
  EXPECT_EQ(metrics["epsilon_per_round"], "inf");
  ASSERT_FALSE(metrics["metrics"].is_null());
  EXPECT_GE(metrics["metrics"]["classes"]["high"]["recall"].get<double>(), 0.9);

  const auto audit = lines_of(slurp(out / "audit.jsonl"));
  ASSERT_FALSE(audit.empty());
  const auto first = nlohmann::json::parse(audit.front());
  for (const char* key : {"round", "user_id", "accepted", "reason", "sigma", "epsilon_cumulative"}) {
    EXPECT_TRUE(first.contains(key)) << key;
  }
  const std::string keys = slurp(out / "model.key");
  EXPECT_EQ(metrics.dump().find(keys.substr(0, 64)), std::string::npos);

  const auto v = run_cli("verify " + quoted(out / "global_model.fedrisk") + " --audit " +
                         quoted(out / "audit.jsonl"));
  EXPECT_EQ(v.exit_code, 0) << v.output;
  EXPECT_TRUE(v.output.starts_with("PASS")) << v.output;
}

TEST(CliRun, RoundsFlagOverridesConfig) {
  const fs::path out = fresh_dir("run_rounds");
  ASSERT_EQ(run_cli("run -c " + quoted(kFixtures / "mouse.json") + " --rounds 2 --out " + quoted(out))
                .exit_code,
            0);
  const auto metrics = nlohmann::json::parse(slurp(out / "metrics.json"));
  EXPECT_EQ(metrics["rounds"], 2);
  EXPECT_EQ(metrics["participants_per_round"].size(), 2u);
}

TEST(CliRun, RepeatedRunsAndJobCountsAreByteIdentical) {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const std::string base = "run -c " + quoted(kFixtures / "keystroke.json") + " --sigma 0.5";
  ASSERT_EQ(run_cli(base + " --out " + quoted(a)).exit_code, 0);
  ASSERT_EQ(run_cli(base + " --jobs 4 --out " + quoted(b)).exit_code, 0);
  for (const char* f : {"metrics.json", "predictions.csv", "audit.jsonl", "global_model.fedrisk",
                        "model.key"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(CliRun, EnvironmentOverridesSeedAndOutputOnly) {
  const fs::path env_out = fresh_dir("env_out");
  const fs::path plain = fresh_dir("env_plain");
  const std::string cfg = quoted(kFixtures / "keystroke.json");
  ASSERT_EQ(run_cli("run -c " + cfg + " --out " + quoted(plain)).exit_code, 0);
  ASSERT_EQ(run_cli("run -c " + cfg, "FEDRISK_SEED=7 FEDRISK_OUT=" + quoted(env_out)).exit_code, 0);
  ASSERT_TRUE(fs::exists(env_out / "metrics.json"));
  EXPECT_EQ(nlohmann::json::parse(slurp(env_out / "metrics.json"))["seed"], 7);
  EXPECT_NE(slurp(env_out / "model.key"), slurp(plain / "model.key"));

  RunConfig c;
  c.pipeline.dp.sigma = 0.25;
  std::map<std::string, std::string> env = {
      {"FEDRISK_SEED", "99"}, {"FEDRISK_OUT", "/tmp/x"}, {"FEDRISK_SIGMA", "3"}};
  apply_env_overrides(c, [&](const char* name) -> const char* {
    const auto it = env.find(name);
    return it == env.end() ? nullptr : it->second.c_str();
  });
  EXPECT_EQ(c.pipeline.seed, 99u);
  EXPECT_EQ(c.out_dir, fs::path("/tmp/x"));
  EXPECT_EQ(c.pipeline.dp.sigma, 0.25);
  env["FEDRISK_SEED"] = "seven";
  EXPECT_EQ(code_of([&] {
              apply_env_overrides(c, [&](const char* name) -> const char* {
                const auto it = env.find(name);
                return it == env.end() ? nullptr : it->second.c_str();
              });
            }),
            ErrorCode::kConfigError);
}

class CliVerify : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(fresh_dir("verify"));
    const auto r = run_cli("run -c " + quoted(kFixtures / "mouse.json") + " --out " + quoted(*dir_));
    ASSERT_EQ(r.exit_code, 0) << r.output;
  }
  static void TearDownTestSuite() { delete dir_; }

  static fs::path model() { return *dir_ / "global_model.fedrisk"; }
  static fs::path audit() { return *dir_ / "audit.jsonl"; }
  static MacKey key() { return parse_key_hex(slurp(*dir_ / "model.key")); }

  static fs::path* dir_;
};

fs::path* CliVerify::dir_ = nullptr;

TEST_F(CliVerify, EveryEditedByteFailsInProcess) {
  const std::string file = slurp(model());
  const std::string log = slurp(audit());
  ASSERT_TRUE(verify_model_file(file, key(), &log).ok);
  std::mt19937_64 rng(2026);
  std::uniform_int_distribution<int> flip(1, 255);
  for (std::size_t i = 0; i < file.size(); ++i) {
    std::string edited = file;
    edited[i] = static_cast<char>(static_cast<unsigned char>(edited[i]) ^ flip(rng));
    EXPECT_FALSE(verify_model_file(edited, key(), &log).ok) << "position " << i;
  }
}

TEST_F(CliVerify, RandomEditsFailThroughTheCli) {
  const std::string file = slurp(model());
  const fs::path dir = fresh_dir("verify_edits");
  fs::copy_file(*dir_ / "model.key", dir / "model.key");
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pos(0, file.size() - 1);
  std::uniform_int_distribution<int> flip(1, 255);
  for (int trial = 0; trial < 12; ++trial) {
    std::string edited = file;
    const std::size_t i = pos(rng);
    edited[i] = static_cast<char>(static_cast<unsigned char>(edited[i]) ^ flip(rng));
    spit(dir / "global_model.fedrisk", edited);
    const auto r = run_cli("verify " + quoted(dir / "global_model.fedrisk"));
    EXPECT_EQ(r.exit_code, 1) << "position " << i << ": " << r.output;
    EXPECT_TRUE(r.output.starts_with("FAIL")) << r.output;
  }
}

TEST_F(CliVerify, WrongKeyFails) {
  const fs::path dir = fresh_dir("verify_key");
  MacKey other = key();
  other[0] ^= 1;
  spit(dir / "other.key", to_hex(other) + "\n");
  const auto r = run_cli("verify " + quoted(model()) + " --key-file " + quoted(dir / "other.key"));
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_NE(r.output.find("bad_tag"), std::string::npos) << r.output;
}

TEST_F(CliVerify, EditedAuditLogFails) {
  const fs::path dir = fresh_dir("verify_audit");
  std::string log = slurp(audit());
  log[log.find("true")] = 'T';
  spit(dir / "audit.jsonl", log);
  const auto r = run_cli("verify " + quoted(model()) + " --audit " + quoted(dir / "audit.jsonl"));
  EXPECT_EQ(r.exit_code, 1) << r.output;
  EXPECT_EQ(run_cli("verify " + quoted(model()) + " --audit " + quoted(audit())).exit_code, 0);
}

TEST_F(CliVerify, MissingFilesExitTwo) {
  EXPECT_EQ(run_cli("verify /no/such/model.fedrisk").exit_code, 2);
  EXPECT_EQ(run_cli("verify " + quoted(model()) + " --key-file /no/such.key").exit_code, 2);
  EXPECT_EQ(run_cli("verify").exit_code, 2);
}

TEST(CliSweep, ThreeSigmasGiveThreeRowsWithExpectedEpsilons) {
  const fs::path out = fresh_dir("sweep");
  const auto r = run_cli("sweep --modality contextual --synthetic --users 8 --sessions 20 "
                         "--sigmas 0,0.5,1.0 --out " + quoted(out));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto rows = lines_of(slurp(out / "sweep.csv"));
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0],
            "modality,sigma,epsilon,accuracy,precision_macro,recall_macro,f1_macro,precision_high,"
            "recall_high,f1_high,n_test");
  const std::vector<double> expected = {9.68, 4.84};
  std::vector<std::string> eps;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::vector<std::string> cells;
    std::istringstream in(rows[i]);
    for (std::string c; std::getline(in, c, ',');) cells.push_back(c);
    ASSERT_EQ(cells.size(), 11u);
    eps.push_back(cells[2]);
  }
  EXPECT_EQ(eps[0], "inf");
  EXPECT_NEAR(std::stod(eps[1]), expected[0], 0.01);
  EXPECT_NEAR(std::stod(eps[2]), expected[1], 0.01);
}

TEST(CliSweep, JsonFormatMirrorsColumns) {
  const fs::path out = fresh_dir("sweep_json");
  ASSERT_EQ(run_cli("sweep -c " + quoted(kFixtures / "keystroke.json") +
                    " --format json --sigmas 0,2 --out " + quoted(out))
                .exit_code,
            0);
  const auto doc = nlohmann::json::parse(slurp(out / "sweep.json"));
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["epsilon"], "inf");
  EXPECT_NEAR(doc[1]["epsilon"].get<double>(), 2.42, 0.01);
  EXPECT_EQ(doc[1].size(), 11u);
}

TEST(CliSweep, RejectsEmptyAndDuplicateSigmaLists) {
  const std::string base = "sweep --modality keystroke --synthetic --users 3 --sessions 10 ";
  const auto empty = run_cli(base + "--sigmas ''");
  EXPECT_EQ(empty.exit_code, 2);
  EXPECT_NE(empty.output.find("empty"), std::string::npos) << empty.output;
  const auto dup = run_cli(base + "--sigmas 0,0.5,0.5");
  EXPECT_EQ(dup.exit_code, 2);
  EXPECT_NE(dup.output.find("duplicate sigma"), std::string::npos) << dup.output;
  EXPECT_EQ(run_cli(base + "--sigmas 1,0.5").exit_code, 2);
  EXPECT_EQ(run_cli(base + "--sigmas 0,abc").exit_code, 2);
}

TEST(CliSweep, NeedsGroundTruth) {
  const auto r = run_cli("sweep --modality keystroke --keystroke " +
                         quoted(kFixtures / "keystroke.csv") + " --sigmas 0");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("ground truth"), std::string::npos) << r.output;
}

TEST(RunConfigTest, ParsesDocumentAndResolvesPaths) {
  const RunConfig c = load_run_config(kFixtures / "contextual.json");
  EXPECT_EQ(c.pipeline.modality, Modality::kContextual);
  EXPECT_EQ(c.pipeline.seed, 42u);
  EXPECT_EQ(c.pipeline.rounds, 3);
  EXPECT_EQ(c.data.logins_csv, kFixtures / "logins.csv");
  EXPECT_EQ(c.data.geo_csv, kFixtures / "geo.csv");
  EXPECT_EQ(c.decay_alpha.at("ip"), 0.5);
  EXPECT_NO_THROW(validate(c));
  EXPECT_NO_THROW(check_inputs_exist(c));
}

TEST(RunConfigTest, DefaultsMatchDocumentedValues) {
  const RunConfig c = parse_run_config(
      R"({"schema_version": 1, "modality": "mouse", "synthetic": {}})", "/base");
  EXPECT_EQ(c.pipeline.rounds, 3);
  EXPECT_EQ(c.pipeline.k, 3);
  EXPECT_EQ(c.pipeline.reference.radius, 10u);
  EXPECT_EQ(c.top_k, 5u);
  EXPECT_EQ(c.pipeline.dp.sigma, 0.0);
  EXPECT_EQ(c.pipeline.train.reg_lambda, 1.0);
  EXPECT_EQ(c.out_dir, fs::path("out"));
  ASSERT_TRUE(c.data.synthetic.has_value());
  EXPECT_EQ(c.data.synthetic->users, 20u);
  EXPECT_EQ(c.data.synthetic->sessions_per_user, 30u);
  EXPECT_NO_THROW(validate(c));
}

TEST(RunConfigTest, RejectsMalformedDocuments) {
  const auto code = [](const std::string& text) {
    return code_of([&] { validate(parse_run_config(text, ".")); });
  };
  EXPECT_EQ(code(R"({"modality": "mouse", "synthetic": {}})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 2, "modality": "mouse", "synthetic": {}})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "voice", "synthetic": {}})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse", "synthetic": {}, "colour": 1})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse", "synthetic": {"user": 3}})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse"})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse", "synthetic": {},
                     "data": {"mouse_csv": "m.csv"}})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "keystroke",
                     "data": {"mouse_csv": "m.csv"}})"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "contextual",
                     "data": {"logins_csv": "l.csv"}})"),
            ErrorCode::kMissingGeoTable);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse", "synthetic": {},)"),
            ErrorCode::kConfigError);
  EXPECT_EQ(code(R"({"schema_version": 1, "modality": "mouse", "synthetic": {},
                     "federation": {"rounds": "three"}})"),
            ErrorCode::kConfigError);
}

TEST(RunConfigTest, RejectsOutOfRangeParameters) {
  const std::string head = R"({"schema_version": 1, "modality": "mouse", "synthetic": {}, )";
  const auto code = [&](const std::string& tail) {
    return code_of([&] { validate(parse_run_config(head + tail + "}", ".")); });
  };
  EXPECT_EQ(code(R"("clustering": {"k": 4})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("federation": {"sigma": -0.1})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("federation": {"rounds": 0})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("federation": {"delta": 1.5})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("training": {"split_ratio": 1.0})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("training": {"reg_lambda": 0})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("similarity": {"radius": 0})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("similarity": {"decay_alpha": {"mouse": 1.5}})"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("synthetic_extra": 1)"), ErrorCode::kConfigError);
  EXPECT_EQ(code(R"("sweep": {"format": "xml"})"), ErrorCode::kUnsupportedFormat);
}

TEST(RunConfigTest, FeatureOverridesApplyToSchema) {
  RunConfig c = parse_run_config(
      R"({"schema_version": 1, "modality": "contextual", "synthetic": {},
          "similarity": {"decay_alpha": {"city": 0.3}, "max_distance": {"geo": 500}}})",
      ".");
  const FeatureSchema schema = resolve_schema(c);
  for (const auto& s : schema) {
    if (s.id == "city") EXPECT_EQ(s.decay_alpha, 0.3);
    if (s.id == "geo") EXPECT_EQ(s.max_distance, 500.0);
  }
  c.decay_alpha["no_such_feature"] = 0.5;
  EXPECT_EQ(code_of([&] { resolve_schema(c); }), ErrorCode::kConfigError);
}

TEST(DatasetIoTest, NormalizedFileRoundTripsEveryModality) {
  for (Modality m : {Modality::kKeystroke, Modality::kMouse, Modality::kContextual}) {
    SynthProfile p;
    p.modality = m;
    p.users = 3;
    p.sessions_per_user = 8;
    const auto ds = synth_generate(p);
    const std::string text = dataset_to_json(m, ds.records);
    const auto back = dataset_from_json(text);
    EXPECT_EQ(back.modality, m);
    ASSERT_EQ(back.records.size(), ds.records.size());
    EXPECT_EQ(dataset_to_json(m, back.records), text) << modality_name(m);
  }
}

TEST(DatasetIoTest, RejectsMalformedDatasets) {
  EXPECT_EQ(code_of([] { dataset_from_json("{}"); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] { dataset_from_json(R"({"schema_version": 9})"); }), ErrorCode::kConfigError);
  EXPECT_EQ(code_of([] {
              dataset_from_json(R"({"schema_version": 1, "modality": "mouse", "records": [
                {"user_id": "u", "session_id": "s", "observations": [
                  {"id": "mouse", "kind": "sequence", "value": "oops"}]}]})");
            }),
            ErrorCode::kConfigError);
}

TEST(DatasetIoTest, TruthCsvRoundTrips) {
  GroundTruth truth = {{{"u1", "s1"}, true}, {{"u1", "s2"}, false}, {{"u,2", "s\"3"}, true}};
  std::istringstream in(truth_to_csv(truth));
  EXPECT_EQ(truth_from_csv(in), truth);
  std::istringstream bad("user_id,session_id,anomalous\nu,s,2\n");
  EXPECT_EQ(code_of([&] { truth_from_csv(bad); }), ErrorCode::kMalformedRow);
}

TEST(ModelFileTest, KeyHexParsing) {
  const MacKey k = model_key_for_seed(42);
  EXPECT_EQ(parse_key_hex(to_hex(k) + "\n"), k);
  EXPECT_EQ(model_key_for_seed(42), k);
  EXPECT_NE(model_key_for_seed(43), k);
  EXPECT_EQ(code_of([] { parse_key_hex("abcd"); }), ErrorCode::kConfigError);
}

}  // namespace
}  // namespace fedrisk
