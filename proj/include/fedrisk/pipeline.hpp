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

// End-to-end orchestration: exclusions, per-user similarity and labeling,
// federated training and evaluation of the global model.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedrisk/dtw.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/evaluation.hpp"
#include "fedrisk/federation.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/ingest/contextual.hpp"
#include "fedrisk/ingest/exclusions.hpp"
#include "fedrisk/ingest/keystroke.hpp"
#include "fedrisk/ingest/mouse.hpp"
#include "fedrisk/ingest/records.hpp"
#include "fedrisk/ingest/scaling.hpp"
#include "fedrisk/local_trainer.hpp"
#include "fedrisk/parallel.hpp"
#include "fedrisk/reference.hpp"
#include "fedrisk/risk_labeling.hpp"

namespace fedrisk {

inline FeatureSchema default_schema(Modality m) {
  switch (m) {
    case Modality::kKeystroke: return keystroke_schema();
    case Modality::kMouse: return mouse_schema();
    case Modality::kContextual: return contextual_schema();
  }
  return {};
}

struct PipelineConfig {
  Modality modality = Modality::kKeystroke;
  FeatureSchema schema;  // empty: the modality's default schema
  ReferenceConfig reference;
  double split_ratio = 0.7;
  int k = 3;
  // Users whose training similarities average at least stable_threshold are
  // clustered with k = 2.
  bool stable_k2 = true;
  double stable_threshold = 0.95;
  KMeansOptions kmeans;
  TrainConfig train;
  int rounds = 3;
  DpConfig dp;
  // Scale each client delta down to L2 norm dp.sensitivity when noise is added.
  bool clip_updates = true;
  bool exclusions_enabled = true;
  ExclusionConfig exclusions;
  std::size_t min_sessions = 6;
  std::uint64_t seed = 42;
  std::size_t jobs = 1;
};

struct UserOutcome {
  std::string user_id;
  std::size_t sessions = 0;
  std::size_t train = 0;
  std::size_t test = 0;
  int k = 0;
  bool stable = false;
  bool eligible = false;
  std::string note;  // why the user did not train, if so
  std::map<RiskLevel, std::size_t> label_counts;
};

struct SessionPrediction {
  std::string user_id;
  std::string session_id;
  RiskLevel risk = RiskLevel::kLow;
  double p_high = 0.0;
};

struct PipelineResult {
  FeatureSchema schema;
  ExclusionReport exclusions;
  std::vector<UserOutcome> users;  // retained users, id order
  RiskModel global_model;
  FederationResult federation;
  std::vector<SessionPrediction> predictions;  // test sessions
  std::optional<MetricsReport> metrics;        // when ground truth was given
};

namespace pipeline_detail {

template <typename F>
auto in_stage(const char* stage, const std::string& user, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string where = std::string("stage ") + stage;
    if (!user.empty()) where += " (user '" + user + "')";
    throw Error(e.code(), where + ": " + e.what());
  }
}

struct PreparedUser {
  UserOutcome outcome;
  std::vector<LabeledVector> labeled;
  std::vector<SimilarityVector> test;
};

// Pairwise DTW among training sessions for each sequence feature, so
// leave-one-out references reuse the same distances.
class DtwCache {
 public:
  DtwCache(const FeatureSchema& schema, std::span<const SessionRecord* const> train,
           const ReferenceConfig& cfg)
      : cfg_(cfg) {
    for (const auto& spec : schema) {
      if (spec.kind != FeatureKind::kSequence) continue;
      Entry e;
      for (const auto* r : train) {
        const auto* o = reference_detail::find_observation(r->observations, spec.id);
        e.seqs.push_back(o != nullptr && !o->missing ? &std::get<Sequence>(o->payload)
                                                     : nullptr);
      }
      const std::size_t n = e.seqs.size();
      e.dist.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          if (e.seqs[i] && e.seqs[j]) {
            e.dist[i * n + j] = dtw_fast(*e.seqs[i], *e.seqs[j], cfg.radius);
          }
        }
      }
      entries_.emplace(spec.id, std::move(e));
    }
  }

  // Reference config for the training set without session `skip` (none
  // skipped when skip >= n).
  ReferenceConfig config_without(std::size_t skip) const {
    ReferenceConfig cfg = cfg_;
    for (const auto& [id, e] : entries_) {
      const std::size_t n = e.seqs.size();
      double best = 0.0;
      const Sequence* first = nullptr;
      for (std::size_t i = 0; i < n; ++i) {
        if (i == skip || !e.seqs[i]) continue;
        if (first == nullptr) first = e.seqs[i];
        for (std::size_t j = i + 1; j < n; ++j) {
          if (j == skip || !e.seqs[j]) continue;
          best = std::max(best, e.dist[i * n + j]);
        }
      }
      if (first == nullptr) continue;
      if (!(best > 0.0)) {
        best = max_dtw_distance(std::span<const Sequence>(first, 1), cfg_.radius,
                                cfg_.default_dtw_scale);
      }
      cfg.max_dtw_override[id] = best;
    }
    return cfg;
  }

 private:
  struct Entry {
    std::vector<const Sequence*> seqs;
    std::vector<double> dist;  // upper triangle, row-major
  };
  ReferenceConfig cfg_;
  std::map<std::string, Entry> entries_;
};

inline PreparedUser prepare_user(const std::string& user,
                                 const std::vector<SessionRecord>& records,
                                 const FeatureSchema& schema, const PipelineConfig& cfg) {
  PreparedUser out;
  UserOutcome& o = out.outcome;
  o.user_id = user;
  o.sessions = records.size();
  if (records.size() < 3) {
    o.note = "fewer than 3 sessions";
    return out;
  }

  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  auto parts = in_stage("split", user, [&] {
    return split<std::size_t>(idx, cfg.split_ratio, derive_seed(cfg.seed, fnv1a64(user), 11));
  });
  // Enrollment keeps the original (chronological) order.
  std::sort(parts.train.begin(), parts.train.end());
  std::sort(parts.test.begin(), parts.test.end());
  std::vector<const SessionRecord*> train;
  for (std::size_t i : parts.train) train.push_back(&records[i]);
  o.train = train.size();
  o.test = parts.test.size();
  if (train.size() < 2) {
    o.note = "fewer than 2 training sessions";
    return out;
  }

  std::vector<SimilarityVector> raw_train;
  std::vector<SimilarityVector> raw_test;
  in_stage("similarity", user, [&] {
    const DtwCache cache(schema, train, cfg.reference);
    std::vector<SessionObservations> enrolled;
    for (const auto* r : train) enrolled.push_back(r->observations);
    for (std::size_t i = 0; i < train.size(); ++i) {
      std::vector<SessionObservations> others;
      for (std::size_t j = 0; j < train.size(); ++j) {
        if (j != i) others.push_back(enrolled[j]);
      }
      const UserReference ref =
          build_reference(user, schema, others, cache.config_without(i));
      raw_train.push_back(
          assemble_similarity_vector(train[i]->session_id, train[i]->observations, ref));
    }
    const UserReference full =
        build_reference(user, schema, enrolled, cache.config_without(train.size()));
    for (std::size_t i : parts.test) {
      raw_test.push_back(
          assemble_similarity_vector(records[i].session_id, records[i].observations, full));
    }
  });

  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& v : raw_train) {
    for (double s : v.scores) {
      mean += s;
      ++count;
    }
  }
  mean /= static_cast<double>(std::max<std::size_t>(count, 1));
  o.stable = mean >= cfg.stable_threshold;
  o.k = cfg.stable_k2 && o.stable ? 2 : cfg.k;

  const ScalingParams scaling = in_stage("scaling", user, [&] { return fit_scaling(raw_train); });
  std::vector<SimilarityVector> train_vectors;
  for (auto& v : raw_train) train_vectors.push_back(apply_scaling(scaling, std::move(v)));
  for (auto& v : raw_test) out.test.push_back(apply_scaling(scaling, std::move(v)));

  if (records.size() < cfg.min_sessions) {
    o.note = "fewer than " + std::to_string(cfg.min_sessions) + " sessions";
    return out;
  }
  if (train_vectors.size() < static_cast<std::size_t>(o.k)) {
    o.note = "fewer training sessions than clusters";
    return out;
  }
  try {
    const LabelingResult labels = label_sessions(
        train_vectors, o.k, derive_seed(cfg.seed, fnv1a64(user), 13), cfg.kmeans);
    for (std::size_t i = 0; i < train_vectors.size(); ++i) {
      ++o.label_counts[labels.labels[i].risk];
      out.labeled.push_back({train_vectors[i], labels.labels[i].risk});
    }
  } catch (const Error& e) {
    o.note = std::string("labeling: ") + e.what();
    out.labeled.clear();
    return out;
  }
  if (o.label_counts.size() < 2) {
    o.note = "single risk class";
    out.labeled.clear();
    return out;
  }
  o.eligible = true;
  return out;
}

inline const std::vector<RiskLevel>& global_classes() {
  static const std::vector<RiskLevel> kClasses = {RiskLevel::kHigh, RiskLevel::kMedium,
                                                  RiskLevel::kLow};
  return kClasses;
}

inline RiskModel as_risk_model(const GlobalModel& g, const std::vector<std::string>& ids,
                               double reg_lambda) {
  RiskModel m = RiskModel::zeros(global_classes(), ids, reg_lambda);
  m.set_parameters(g.parameters);
  return m;
}

// One local training pass warm-started from the global model. Classes the
// user does not have keep the global rows, so their delta is zero.
inline std::vector<double> local_delta(const PreparedUser& p, const GlobalModel& global,
                                       const std::vector<std::string>& ids,
                                       const PipelineConfig& cfg) {
  const RiskModel g = as_risk_model(global, ids, cfg.train.reg_lambda);
  std::vector<RiskLevel> classes;
  for (const auto& [level, n] : p.outcome.label_counts) classes.push_back(level);
  std::vector<std::size_t> rows;
  for (RiskLevel c : classes) rows.push_back(static_cast<std::size_t>(c));

  const std::size_t d = ids.size();
  RiskModel init = RiskModel::zeros(classes, ids, cfg.train.reg_lambda);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t f = 0; f < d; ++f) init.weights[c * d + f] = g.weights[rows[c] * d + f];
    init.bias[c] = g.bias[rows[c]];
  }
  const RiskModel local = train(p.labeled, cfg.train, &init);

  RiskModel merged = g;
  for (std::size_t c = 0; c < rows.size(); ++c) {
    for (std::size_t f = 0; f < d; ++f) {
      merged.weights[rows[c] * d + f] = local.weights[c * d + f];
    }
    merged.bias[rows[c]] = local.bias[c];
  }
  std::vector<double> delta = merged.parameters();
  for (std::size_t j = 0; j < delta.size(); ++j) delta[j] -= global.parameters[j];
  if (cfg.clip_updates && cfg.dp.sigma > 0.0) {
    double norm = 0.0;
    for (double v : delta) norm += v * v;
    norm = std::sqrt(norm);
    if (norm > cfg.dp.sensitivity) {
      const double scale = cfg.dp.sensitivity / norm;
      for (double& v : delta) v *= scale;
    }
  }
  return delta;
}

}  // namespace pipeline_detail

// Applies the exclusion rules to records grouped by user. Similarity for the
// variance rule is computed in-sample, leave-one-out.
inline ExclusionReport run_exclusions(
    const std::map<std::string, std::vector<SessionRecord>>& by_user,
    const FeatureSchema& schema, const PipelineConfig& cfg) {
  using pipeline_detail::in_stage;
  std::vector<const std::string*> users;
  for (const auto& [u, rs] : by_user) users.push_back(&u);
  ExclusionReport report;
  if (cfg.exclusions_enabled) {
    std::vector<std::vector<std::vector<double>>> in_sample(users.size());
    parallel_for(users.size(), cfg.jobs, [&](std::size_t i) {
      const auto& rs = by_user.at(*users[i]);
      if (rs.size() < cfg.exclusions.min_events) return;
      in_sample[i] = in_stage("exclusions", *users[i], [&] {
        return in_sample_similarity(*users[i], rs, schema, cfg.reference);
      });
    });
    std::map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < users.size(); ++i) slot[*users[i]] = i;
    report = apply_exclusions(
        by_user, cfg.exclusions,
        [&](const std::string& u, std::span<const SessionRecord>) { return in_sample[slot[u]]; });
  } else {
    for (const auto* u : users) report.retained.push_back(*u);
  }
  return report;
}

// Runs the whole pipeline. Ground truth, when given, is consulted only after
// the global model has been trained, to score its test-split predictions as
// high versus not high.
inline PipelineResult run_pipeline(std::span<const SessionRecord> records,
                                   const PipelineConfig& cfg,
                                   const GroundTruth* truth = nullptr,
                                   const UpdateInterceptor& intercept = {}) {
  using namespace pipeline_detail;
  PipelineResult result;
  result.schema = cfg.schema.empty() ? default_schema(cfg.modality) : cfg.schema;
  const FeatureSchema& schema = result.schema;
  const std::vector<std::string> ids = coordinate_ids(schema);

  std::map<std::string, std::vector<SessionRecord>> by_user;
  for (const auto& r : records) {
    if (r.modality != cfg.modality) {
      fail(ErrorCode::kConfigError, "record '" + r.session_id + "' has modality " +
                                        std::string(modality_name(r.modality)));
    }
    by_user[r.user_id].push_back(r);
  }
  result.exclusions = run_exclusions(by_user, schema, cfg);

  std::vector<PreparedUser> prepared(result.exclusions.retained.size());
  parallel_for(prepared.size(), cfg.jobs, [&](std::size_t i) {
    const std::string& u = result.exclusions.retained[i];
    prepared[i] = prepare_user(u, by_user.at(u), schema, cfg);
  });
  for (const auto& p : prepared) result.users.push_back(p.outcome);

  std::vector<FederationClient> clients;
  std::vector<std::string> eligible_ids;
  for (const auto& p : prepared) {
    if (!p.outcome.eligible) continue;
    eligible_ids.push_back(p.outcome.user_id);
    clients.push_back({p.outcome.user_id, true, [&p, &ids, &cfg](const GlobalModel& g) {
                         return in_stage("training", p.outcome.user_id,
                                         [&] { return local_delta(p, g, ids, cfg); });
                       }});
  }
  GlobalModel init;
  init.parameters.assign(global_classes().size() * (ids.size() + 1), 0.0);
  KeyStore keystore = KeyStore::generate(eligible_ids, derive_seed(cfg.seed, fnv1a64("keys")));
  result.federation = in_stage("federation", "", [&] {
    return run_federation(clients, std::move(init), cfg.rounds, cfg.dp, keystore, intercept);
  });
  result.global_model = as_risk_model(result.federation.global, ids, cfg.train.reg_lambda);

  std::vector<LabelPair> pairs;
  for (const auto& p : prepared) {
    for (const auto& v : p.test) {
      const auto proba = predict_proba(result.global_model, v);
      SessionPrediction sp;
      sp.user_id = p.outcome.user_id;
      sp.session_id = v.session_id;
      sp.risk = classify_proba(result.global_model.classes, proba);
      sp.p_high = proba[0];
      if (truth != nullptr) {
        const auto it = truth->find({sp.user_id, sp.session_id});
        if (it == truth->end()) {
          fail(ErrorCode::kInvalidArgument,
               "no ground truth for session '" + sp.session_id + "'");
        }
        pairs.push_back({it->second ? 0u : 1u, sp.risk == RiskLevel::kHigh ? 0u : 1u});
      }
      result.predictions.push_back(std::move(sp));
    }
  }
  if (truth != nullptr) {
    result.metrics = in_stage("evaluation", "", [&] {
      return compute_metrics(pairs, high_risk_classes());
    });
  }
  return result;
}

}  // namespace fedrisk
