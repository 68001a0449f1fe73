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


// Acceptance gate. Runs every acceptance criterion at its stated tolerance
// and prints one PASS or FAIL line per criterion. Exits nonzero on any FAIL.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../dtw_oracle.hpp"
#include "fedrisk/correlation.hpp"
#include "fedrisk/dp.hpp"
#include "fedrisk/dtw.hpp"
#include "fedrisk/federation.hpp"
#include "fedrisk/ingest/synthetic.hpp"
#include "fedrisk/local_trainer.hpp"
#include "fedrisk/pipeline.hpp"
#include "fedrisk/risk_labeling.hpp"

namespace fedrisk {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// 1. Privacy-budget curve.
Outcome epsilon_curve() {
  const std::vector<std::pair<double, double>> marked = {
      {0.5, 9.68}, {1.0, 4.84}, {2.0, 2.42}, {3.0, 1.613},
      {4.0, 1.21}, {5.0, 0.968}, {7.0, 0.691}, {10.0, 0.484}};
  double worst = 0.0;
  for (const auto& [sigma, eps] : marked) {
    DpConfig cfg;
    cfg.sigma = sigma;
    cfg.delta = 1e-5;
    cfg.sensitivity = 1.0;
    worst = std::max(worst, std::abs(epsilon_of_sigma(cfg) - eps));
  }
  return {worst <= 0.01, "max |eps - marked| = " + fmt("%.4g", worst) + " over 8 points"};
}

std::vector<double> gaussian_values(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

// 2. DTW oracle equivalence and FastDTW accuracy.
Outcome dtw_oracle() {
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<std::size_t> len(1, 8);
  int exact_mismatch = 0;
  for (int t = 0; t < 200; ++t) {
    const auto a = gaussian_values(rng, len(rng));
    const auto b = gaussian_values(rng, len(rng));
    if (dtw_exact(scalar_sequence(a), scalar_sequence(b)) != testing::brute_force_dtw(a, b)) {
      ++exact_mismatch;
    }
  }
  int base_mismatch = 0;
  for (std::size_t radius : {1u, 2u, 5u, 10u}) {
    std::uniform_int_distribution<std::size_t> short_len(1, 2 * radius + 2);
    for (int t = 0; t < 25; ++t) {
      const Sequence a = scalar_sequence(gaussian_values(rng, short_len(rng)));
      const Sequence b = scalar_sequence(gaussian_values(rng, short_len(rng)));
      if (dtw_fast(a, b, radius) != dtw_exact(a, b)) ++base_mismatch;
    }
  }
  double worst_rel = 0.0;
  double sum_rel = 0.0;
  int over = 0;
  for (int t = 0; t < 50; ++t) {
    const Sequence a = scalar_sequence(gaussian_values(rng, 200));
    const Sequence b = scalar_sequence(gaussian_values(rng, 200));
    const double exact = dtw_exact(a, b);
    const double rel = std::abs(dtw_fast(a, b, 10) - exact) / exact;
    worst_rel = std::max(worst_rel, rel);
    sum_rel += rel;
    over += rel > 0.05 ? 1 : 0;
  }
  const bool pass = exact_mismatch == 0 && base_mismatch == 0 && worst_rel <= 0.05;
  return {pass, std::to_string(exact_mismatch) + "/200 exact mismatches, " +
                    std::to_string(base_mismatch) + "/100 base-case mismatches, " +
                    std::to_string(over) + "/50 FastDTW pairs over 5% at radius 10 (max " +
                    fmt("%.4f", worst_rel) + ", mean " + fmt("%.4f", sum_rel / 50) + ")"};
}

// 3. Aggregate-noise law, measured through run_federation.
Outcome aggregate_noise() {
  constexpr int kRounds = 10000;
  std::string detail;
  bool pass = true;
  for (int n : {2, 5, 10}) {
    std::vector<std::string> ids;
    for (int c = 0; c < n; ++c) ids.push_back("client-" + std::to_string(c));
    std::vector<double> seen;
    seen.reserve(kRounds + 1);
    std::vector<FederationClient> clients;
    for (int c = 0; c < n; ++c) {
      clients.push_back({ids[static_cast<std::size_t>(c)], true, [&seen, c](const GlobalModel& g) {
                           if (c == 0) seen.push_back(g.parameters[0]);
                           return std::vector<double>{0.0};
                         }});
    }
    KeyStore keys = KeyStore::generate(ids, 11);
    DpConfig dp;
    dp.sigma = 1.0;
    dp.seed = static_cast<std::uint64_t>(1000 + n);
    const auto r = run_federation(clients, {{0.0}, 0, {}}, kRounds, dp, keys);
    seen.push_back(r.global.parameters[0]);
    double mean = 0.0;
    for (int i = 0; i < kRounds; ++i) mean += seen[i + 1] - seen[i];
    mean /= kRounds;
    double var = 0.0;
    for (int i = 0; i < kRounds; ++i) {
      const double d = seen[i + 1] - seen[i] - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / (kRounds - 1));
    const double target = 1.0 / std::sqrt(static_cast<double>(n));
    const double rel = std::abs(sd - target) / target;
    pass = pass && rel <= 0.05;
    detail += "n=" + std::to_string(n) + " sd=" + fmt("%.4f", sd) + " (target " +
              fmt("%.4f", target) + ", " + fmt("%.1f", 100 * rel) + "%) ";
  }
  return {pass, detail};
}

// 4. Tamper and replay exclusion.
Outcome tamper_replay() {
  const std::vector<std::string> ids = {"client-0", "client-1", "client-2", "client-3",
                                        "client-4"};
  constexpr std::size_t kDim = 6;
  auto clients_without = [&](const std::string& skip) {
    std::vector<FederationClient> out;
    for (std::size_t c = 0; c < ids.size(); ++c) {
      if (ids[c] == skip) continue;
      const double target = 0.1 + 0.2 * static_cast<double>(c);
      out.push_back({ids[c], true, [target](const GlobalModel& g) {
                       std::vector<double> d(g.dimension());
                       for (std::size_t j = 0; j < d.size(); ++j) {
                         d[j] = target * static_cast<double>(j + 1) - g.parameters[j];
                       }
                       return d;
                     }});
    }
    return out;
  };
  auto run = [&](const std::vector<FederationClient>& clients, const DpConfig& dp,
                 const UpdateInterceptor& intercept) {
    KeyStore keys = KeyStore::generate(ids, 77);
    return run_federation(clients, {std::vector<double>(kDim, 0.0), 0, {}}, 3, dp, keys,
                          intercept);
  };

  std::mt19937_64 rng(4242);
  int tampered_total = 0;
  int tampered_rejected = 0;
  int replay_total = 0;
  int replay_rejected = 0;
  int model_mismatch = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string offender = ids[rng() % ids.size()];
    DpConfig dp;
    dp.sigma = trial % 2 == 0 ? 0.0 : 0.5;
    dp.seed = static_cast<std::uint64_t>(trial);
    std::mt19937_64 trial_rng(rng());
    std::vector<ModelUpdate> previous;
    std::vector<std::size_t> tampered_at;
    std::vector<std::size_t> replay_at;
    std::size_t audit_offset = 0;
    const auto attacked = run(clients_without(""), dp, [&](std::int64_t, std::vector<ModelUpdate>& q) {
      const std::vector<ModelUpdate> fresh = q;
      for (std::size_t i = 0; i < q.size(); ++i) {
        if (q[i].user_id != offender) continue;
        ModelUpdate& u = q[i];
        switch (trial_rng() % 4) {
          case 0: {
            const std::size_t j = trial_rng() % u.delta.size();
            u.delta[j] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(u.delta[j]) ^
                                               (std::uint64_t{1} << (trial_rng() % 64)));
            break;
          }
          case 1:
            u.timestamp ^= std::int64_t{1} << (trial_rng() % 63);
            break;
          case 2:
            u.user_id[trial_rng() % u.user_id.size()] ^= static_cast<char>(1 << (trial_rng() % 8));
            break;
          default:
            u.round ^= std::int64_t{1} << (trial_rng() % 63);
            break;
        }
        tampered_at.push_back(audit_offset + i);
      }
      // Replays: every honest update of this round again, then last round's.
      for (const auto& u : fresh) {
        if (u.user_id == offender) continue;
        replay_at.push_back(audit_offset + q.size());
        q.push_back(u);
      }
      for (const auto& u : previous) {
        replay_at.push_back(audit_offset + q.size());
        q.push_back(u);
      }
      previous.clear();
      for (const auto& u : fresh) {
        if (u.user_id != offender) previous.push_back(u);
      }
      audit_offset += q.size();
    });
    const auto clean = run(clients_without(offender), dp, {});
    for (std::size_t i : tampered_at) {
      ++tampered_total;
      tampered_rejected += !attacked.audit.at(i).accepted;
    }
    for (std::size_t i : replay_at) {
      ++replay_total;
      replay_rejected += !attacked.audit.at(i).accepted;
    }
    if (attacked.global.parameters != clean.global.parameters) ++model_mismatch;
  }
  const bool pass = tampered_rejected == tampered_total && replay_rejected == replay_total &&
                    model_mismatch == 0 && tampered_total == 3000;
  return {pass, std::to_string(tampered_rejected) + "/" + std::to_string(tampered_total) +
                    " tampered rejected, " + std::to_string(replay_rejected) + "/" +
                    std::to_string(replay_total) + " replays rejected, " +
                    std::to_string(model_mismatch) + "/1000 models differ from the exclusion run"};
}

// 5. Synthetic end-to-end detection.
Outcome synthetic_detection() {
  bool pass = true;
  std::string detail;
  for (Modality m : {Modality::kKeystroke, Modality::kMouse, Modality::kContextual}) {
    SynthProfile p;
    p.modality = m;
    p.users = 20;
    p.sessions_per_user = 30;
    p.anomaly_fraction = 0.1;
    p.seed = 42;
    const SynthDataset ds = synth_generate(p);
    PipelineConfig cfg;
    cfg.modality = m;
    cfg.seed = p.seed;
    cfg.dp.sigma = 0.0;
    const auto r = run_pipeline(ds.records, cfg, &ds.truth);
    const ClassMetrics& high = r.metrics->per_class.at(0);
    pass = pass && high.recall >= 0.9 && high.precision >= 0.7;
    detail += std::string(modality_name(m)) + " P=" + fmt("%.3f", high.precision) +
              " R=" + fmt("%.3f", high.recall) + " ";
  }
  return {pass, detail};
}

// 6. Gradient check.
Outcome gradient_check() {
  std::mt19937_64 rng(606);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const std::vector<std::string> features = {"f0", "f1", "f2", "f3"};
  std::vector<LabeledVector> samples;
  for (int i = 0; i < 45; ++i) {
    const int c = i % 3;
    std::vector<double> x;
    for (std::size_t d = 0; d < features.size(); ++d) {
      x.push_back(std::clamp(0.25 + 0.25 * c + 0.2 * (u01(rng) - 0.5), 0.0, 1.0));
    }
    samples.push_back({{"u", "s" + std::to_string(i), x, features}, static_cast<RiskLevel>(c)});
  }
  const std::vector<RiskLevel> classes = {RiskLevel::kHigh, RiskLevel::kMedium, RiskLevel::kLow};
  TrainConfig cfg;
  cfg.reg_lambda = 0.5;
  const TrainingProblem problem = make_problem(samples, classes, cfg);
  const std::size_t dim = problem.k * problem.d + problem.k;
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int point = 0; point < 10; ++point) {
    std::vector<double> theta(dim);
    for (auto& v : theta) v = g(rng);
    const auto analytic = loss_and_gradient(problem, theta).gradient;
    for (std::size_t j = 0; j < dim; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
      auto plus = theta;
      auto minus = theta;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (loss_and_gradient(problem, plus, false).loss -
                         loss_and_gradient(problem, minus, false).loss) /
                        (plus[j] - minus[j]);
      const double denom = std::max(std::abs(analytic[j]), std::abs(fd));
      const double rel = denom == 0.0 ? 0.0 : std::abs(analytic[j] - fd) / denom;
      worst = std::max(worst, rel);
    }
  }
  return {worst < 1e-5, "max relative error " + fmt("%.3g", worst) + " over 10 points x " +
                            std::to_string(dim) + " coordinates"};
}

using Points = std::vector<std::vector<double>>;

// Exhaustive minimum-SSE partition into k non-empty clusters.
std::vector<int> optimal_partition(const Points& xs, int k) {
  const std::size_t n = xs.size();
  const std::size_t dim = xs[0].size();
  std::vector<int> assign(n, 0);
  std::vector<int> best;
  double best_sse = std::numeric_limits<double>::infinity();
  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= static_cast<std::size_t>(k);
  std::vector<double> sum(static_cast<std::size_t>(k) * dim);
  std::vector<double> sq(static_cast<std::size_t>(k));
  std::vector<int> count(static_cast<std::size_t>(k));
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(sq.begin(), sq.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      assign[i] = static_cast<int>(c % static_cast<std::size_t>(k));
      c /= static_cast<std::size_t>(k);
      const auto a = static_cast<std::size_t>(assign[i]);
      ++count[a];
      for (std::size_t d = 0; d < dim; ++d) {
        sum[a * dim + d] += xs[i][d];
        sq[a] += xs[i][d] * xs[i][d];
      }
    }
    if (std::find(count.begin(), count.end(), 0) != count.end()) continue;
    double sse = 0.0;
    for (std::size_t a = 0; a < count.size(); ++a) {
      double s2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) s2 += sum[a * dim + d] * sum[a * dim + d];
      sse += sq[a] - s2 / count[a];
    }
    if (sse < best_sse - 1e-12) {
      best_sse = sse;
      best = assign;
    }
  }
  return best;
}

// Smallest-norm cluster mean is High, then Medium, then Low.
std::vector<RiskLevel> inverse_norm_ranking(const Points& xs, const std::vector<int>& assign) {
  std::vector<std::vector<double>> mean(3, std::vector<double>(xs[0].size(), 0.0));
  std::vector<int> count(3, 0);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t d = 0; d < xs[i].size(); ++d) mean[assign[i]][d] += xs[i][d];
    ++count[assign[i]];
  }
  std::vector<std::pair<double, int>> norms;
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (double v : mean[c]) s += (v / count[c]) * (v / count[c]);
    norms.push_back({std::sqrt(s), c});
  }
  std::sort(norms.begin(), norms.end());
  std::vector<RiskLevel> risk_of(3);
  risk_of[norms[0].second] = RiskLevel::kHigh;
  risk_of[norms[1].second] = RiskLevel::kMedium;
  risk_of[norms[2].second] = RiskLevel::kLow;
  std::vector<RiskLevel> out;
  for (int a : assign) out.push_back(risk_of[a]);
  return out;
}

// 7. Clustering and labeling oracle over the bundled 12-point instances.
Outcome clustering_oracle() {
  std::ifstream in(fs::path(FEDRISK_FIXTURES) / "clusters12.json");
  if (!in) return {false, "cannot open clusters12.json"};
  const auto doc = nlohmann::json::parse(in);
  int instances = 0;
  int mismatched = 0;
  for (const auto& inst : doc.at("instances")) {
    const Points xs = inst.at("points").get<Points>();
    std::vector<SimilarityVector> vs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      char id[24];
      std::snprintf(id, sizeof(id), "s%02zu", i);
      vs.push_back({"u", id, xs[i], {"f0", "f1", "f2"}});
    }
    const auto labels = label_sessions(vs, 3, inst.at("seed").get<std::uint64_t>());
    const auto oracle = inverse_norm_ranking(xs, optimal_partition(xs, 3));
    bool same = xs.size() == 12;
    for (std::size_t i = 0; i < xs.size(); ++i) same = same && labels.labels[i].risk == oracle[i];
    ++instances;
    mismatched += same ? 0 : 1;
  }
  return {instances > 0 && mismatched == 0,
          std::to_string(instances - mismatched) + "/" + std::to_string(instances) +
              " instances match the exhaustive oracle"};
}

// 8. Cross-group correlation diagnostic. Each group's two coordinates are
// noisy readings of one latent value; latents are independent across groups.
Outcome correlation_diagnostic() {
  constexpr std::size_t kGroups = 4;
  constexpr std::size_t kSamples = 1000;
  std::mt19937_64 rng(808);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::vector<std::string> ids;
  FeatureGroups groups(kGroups);
  for (std::size_t g = 0; g < kGroups; ++g) {
    for (int c = 0; c < 2; ++c) {
      ids.push_back("g" + std::to_string(g) + "_" + std::to_string(c));
      groups[g].push_back(ids.back());
    }
  }
  std::vector<std::vector<double>> latent(kSamples, std::vector<double>(kGroups));
  for (auto& row : latent) {
    for (auto& v : row) v = u01(rng);
  }
  auto build = [&](std::size_t source_of_group1) {
    std::mt19937_64 nrng(909);
    std::vector<SimilarityVector> vs;
    for (std::size_t i = 0; i < kSamples; ++i) {
      std::vector<double> x;
      for (std::size_t g = 0; g < kGroups; ++g) {
        const double z = latent[i][g == 1 ? source_of_group1 : g];
        for (int c = 0; c < 2; ++c) x.push_back(z + noise(nrng));
      }
      vs.push_back({"u", std::to_string(i), x, ids});
    }
    return vs;
  };
  const auto independent = cross_group_correlation(build(1), groups);
  const auto duplicated = cross_group_correlation(build(0), groups);
  const double affected = duplicated.pair_mean[0][1];
  const double expected_bound = kGroups * (kGroups - 1) / 2.0 * independent.eps_avg;
  const bool pass = independent.eps_avg < 0.1 && independent.bound < 0.6 &&
                    std::abs(independent.bound - expected_bound) < 1e-12 && affected > 0.9;
  return {pass, "eps_avg=" + fmt("%.4f", independent.eps_avg) + " bound=" +
                    fmt("%.4f", independent.bound) + "; duplicated pair mean=" +
                    fmt("%.4f", affected)};
}

int run_command(const std::string& args) {
  const std::string cmd = std::string(FEDRISK_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Determinism of the run and sweep commands.
Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "fedrisk_acceptance";
  fs::remove_all(root);
  const fs::path fixtures = FEDRISK_FIXTURES;
  const std::string run_args = "run -c '" + (fixtures / "contextual.json").string() + "' --sigma 0.5";
  const std::string sweep_args = "sweep -c '" + (fixtures / "keystroke.json").string() +
                                 "' --sigmas 0,0.5,1.0";
  int failures = 0;
  int compared = 0;
  for (const char* tag : {"a", "b"}) {
    failures += run_command(run_args + " --out '" + (root / "run" / tag).string() + "'") != 0;
    failures += run_command(sweep_args + " --out '" + (root / "sweep" / tag).string() + "'") != 0;
    failures += run_command(sweep_args + " --format json --out '" +
                            (root / "sweep_json" / tag).string() + "'") != 0;
  }
  for (const auto& [dir, files] :
       std::vector<std::pair<std::string, std::vector<std::string>>>{
           {"run", {"metrics.json", "predictions.csv", "audit.jsonl", "global_model.fedrisk"}},
           {"sweep", {"sweep.csv"}},
           {"sweep_json", {"sweep.json"}}}) {
    for (const auto& f : files) {
      const std::string a = slurp(root / dir / "a" / f);
      const std::string b = slurp(root / dir / "b" / f);
      ++compared;
      failures += a.empty() || a != b;
    }
  }
  fs::remove_all(root);
  return {failures == 0, std::to_string(compared) + " output files compared, " +
                             std::to_string(failures) + " differences or command failures"};
}

}  // namespace
}  // namespace fedrisk

int main() {
  using Check = std::pair<const char*, std::function<fedrisk::Outcome()>>;
  const std::vector<Check> checks = {
      {"privacy-budget curve", fedrisk::epsilon_curve},
      {"DTW oracle equivalence", fedrisk::dtw_oracle},
      {"aggregate-noise law", fedrisk::aggregate_noise},
      {"tamper/replay exclusion", fedrisk::tamper_replay},
      {"synthetic end-to-end detection", fedrisk::synthetic_detection},
      {"gradient check", fedrisk::gradient_check},
      {"clustering/labeling oracle", fedrisk::clustering_oracle},
      {"cross-group correlation diagnostic", fedrisk::correlation_diagnostic},
      {"determinism", fedrisk::cli_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    fedrisk::Outcome o;
    try {
      o = checks[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %zu (%s): %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1,
                checks[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
