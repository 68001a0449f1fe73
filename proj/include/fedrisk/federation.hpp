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

// Round-based federated averaging with authenticated, noised updates.
//
// Each round every eligible client computes a delta against the current
// global parameters, adds Gaussian noise, and tags
//   delta || timestamp || user_id || round
// with its HMAC key. The aggregator verifies tag, round, replay and clock
// freshness, averages the accepted deltas (zero-padded to the global
// dimension, summed in user-id order) and applies the mean.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fedrisk/bytes.hpp"
#include "fedrisk/dp.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/mac.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

struct ModelUpdate {
  std::string user_id;
  std::int64_t round = 0;
  std::vector<double> delta;
  std::int64_t timestamp = 0;
  MacTag tag{};
};

// MAC input: u64 length + f64 LE delta, i64 timestamp, u64 length + UTF-8
// user id, i64 round.
inline Bytes canonical_update_bytes(std::span<const double> delta,
                                    std::int64_t timestamp,
                                    std::string_view user_id,
                                    std::int64_t round) {
  ByteWriter w;
  w.f64_array(delta);
  w.i64(timestamp);
  w.str(user_id);
  w.i64(round);
  return std::move(w).bytes();
}

class KeyStore {
 public:
  explicit KeyStore(std::int64_t freshness_window = 1)
      : freshness_window_(freshness_window) {}

  // Deterministic keys for a simulated population.
  static KeyStore generate(std::span<const std::string> user_ids,
                           std::uint64_t seed,
                           std::int64_t freshness_window = 1) {
    KeyStore ks(freshness_window);
    std::vector<std::string> sorted(user_ids.begin(), user_ids.end());
    std::sort(sorted.begin(), sorted.end());
    std::mt19937_64 rng(derive_seed(seed, fnv1a64("keystore")));
    for (const auto& id : sorted) ks.add(id, derive_key(rng));
    return ks;
  }

  void add(const std::string& user_id, const MacKey& key) {
    for (const auto& [other, k] : keys_) {
      if (k == key && other != user_id) {
        fail(ErrorCode::kInvalidArgument, "duplicate key for '" + user_id + "'");
      }
    }
    keys_[user_id] = key;
  }

  const MacKey* find(const std::string& user_id) const {
    const auto it = keys_.find(user_id);
    return it == keys_.end() ? nullptr : &it->second;
  }

  const MacKey& key(const std::string& user_id) const {
    const MacKey* k = find(user_id);
    if (k == nullptr) fail(ErrorCode::kMissingKey, "no key for '" + user_id + "'");
    return *k;
  }

  std::int64_t freshness_window() const { return freshness_window_; }

  bool seen(const std::string& user_id, std::int64_t round,
            std::int64_t timestamp) const {
    const auto it = seen_.find(user_id);
    return it != seen_.end() && it->second.contains({round, timestamp});
  }

  void mark_seen(const std::string& user_id, std::int64_t round,
                 std::int64_t timestamp) {
    seen_[user_id].insert({round, timestamp});
  }

 private:
  std::int64_t freshness_window_;
  std::map<std::string, MacKey> keys_;
  std::map<std::string, std::set<std::pair<std::int64_t, std::int64_t>>> seen_;
};

inline ModelUpdate make_update(const std::string& user_id, std::int64_t round,
                               std::vector<double> delta,
                               const KeyStore& keystore, std::int64_t clock) {
  const MacKey& key = keystore.key(user_id);
  ModelUpdate u;
  u.user_id = user_id;
  u.round = round;
  u.delta = std::move(delta);
  u.timestamp = clock;
  u.tag = hmac_sha256(key, canonical_update_bytes(u.delta, u.timestamp,
                                                  u.user_id, u.round));
  return u;
}

enum class VerifyReason { kAccepted, kBadTag, kStaleRound, kReplay, kClockSkew };

constexpr std::string_view verify_reason_name(VerifyReason r) {
  switch (r) {
    case VerifyReason::kAccepted: return "accepted";
    case VerifyReason::kBadTag: return "bad_tag";
    case VerifyReason::kStaleRound: return "stale_round";
    case VerifyReason::kReplay: return "replay";
    case VerifyReason::kClockSkew: return "clock_skew";
  }
  return "unknown";
}

struct VerifyOutcome {
  bool accepted = false;
  VerifyReason reason = VerifyReason::kBadTag;
};

// Rejections are outcomes, not errors. An accepted update is recorded so an
// identical resubmission is refused as a replay.
inline VerifyOutcome verify_update(const ModelUpdate& update,
                                   KeyStore& keystore,
                                   std::int64_t current_round,
                                   std::int64_t aggregator_clock) {
  const MacKey* key = keystore.find(update.user_id);
  bool tag_ok = false;
  if (key != nullptr) {
    const MacTag expected = hmac_sha256(
        *key, canonical_update_bytes(update.delta, update.timestamp,
                                     update.user_id, update.round));
    tag_ok = constant_time_equal(expected, update.tag);
  }
  if (!tag_ok) return {false, VerifyReason::kBadTag};
  if (update.round != current_round) return {false, VerifyReason::kStaleRound};
  if (keystore.seen(update.user_id, update.round, update.timestamp)) {
    return {false, VerifyReason::kReplay};
  }
  const std::int64_t skew = update.timestamp > aggregator_clock
                                ? update.timestamp - aggregator_clock
                                : aggregator_clock - update.timestamp;
  if (skew > keystore.freshness_window()) {
    return {false, VerifyReason::kClockSkew};
  }
  for (double v : update.delta) {
    if (!std::isfinite(v)) return {false, VerifyReason::kBadTag};
  }
  keystore.mark_seen(update.user_id, update.round, update.timestamp);
  return {true, VerifyReason::kAccepted};
}

// Coordinate-wise mean of the deltas after zero-padding each to global_dim.
// Summation runs in user-id order, so arrival order never changes the bits.
inline std::vector<double> fed_avg(std::span<const ModelUpdate> updates,
                                   std::size_t global_dim) {
  if (updates.empty()) {
    fail(ErrorCode::kNoAcceptedUpdates, "nothing to aggregate");
  }
  std::vector<const ModelUpdate*> ordered;
  for (const auto& u : updates) ordered.push_back(&u);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const ModelUpdate* a, const ModelUpdate* b) {
                     return a->user_id < b->user_id;
                   });
  std::vector<double> sum(global_dim, 0.0);
  for (const ModelUpdate* u : ordered) {
    if (u->delta.size() > global_dim) {
      fail(ErrorCode::kDimensionMismatch,
           "update from '" + u->user_id + "' exceeds the global dimension");
    }
    for (std::size_t j = 0; j < u->delta.size(); ++j) sum[j] += u->delta[j];
  }
  const auto n = static_cast<double>(ordered.size());
  for (double& v : sum) v /= n;
  return sum;
}

struct RoundRecord {
  std::size_t participants = 0;
  double sigma = 0.0;
  double epsilon_increment = 0.0;
};

struct GlobalModel {
  std::vector<double> parameters;
  std::int64_t round = 0;
  std::vector<RoundRecord> history;

  std::size_t dimension() const { return parameters.size(); }

  // Linear composition of the per-round budgets: a conservative upper bound.
  double cumulative_epsilon() const {
    double eps = 0.0;
    for (const auto& r : history) eps += r.epsilon_increment;
    return eps;
  }
};

inline GlobalModel apply_round(GlobalModel global,
                               std::span<const double> aggregated,
                               const DpConfig& cfg, std::size_t n) {
  check_same_dim(aggregated.size(), global.dimension(), "apply_round");
  for (std::size_t j = 0; j < aggregated.size(); ++j) {
    global.parameters[j] += aggregated[j];
  }
  global.round += 1;
  global.history.push_back(
      {n, cfg.sigma, cfg.sigma > 0.0 ? epsilon_of_sigma(cfg) : 0.0});
  return global;
}

struct AuditRecord {
  std::int64_t round = 0;
  std::string user_id;
  bool accepted = false;
  VerifyReason reason = VerifyReason::kAccepted;
  double sigma = 0.0;
  double epsilon_cumulative = 0.0;
};

struct FederationClient {
  std::string user_id;
  bool eligible = true;
  // Returns the client's parameter delta against the given global model.
  std::function<std::vector<double>(const GlobalModel&)> compute_delta;
};

// Sees (and may rewrite) each round's update queue before verification. Used
// to simulate tampering and replay.
using UpdateInterceptor =
    std::function<void(std::int64_t round, std::vector<ModelUpdate>& queue)>;

struct FederationResult {
  GlobalModel global;
  std::vector<AuditRecord> audit;
};

inline FederationResult run_federation(std::span<const FederationClient> clients,
                                       GlobalModel init, int rounds,
                                       const DpConfig& dp, KeyStore& keystore,
                                       const UpdateInterceptor& intercept = {}) {
  validate(dp);
  std::vector<const FederationClient*> eligible;
  for (const auto& c : clients) {
    if (c.eligible) eligible.push_back(&c);
  }
  if (eligible.empty()) fail(ErrorCode::kNoEligibleClients, "no eligible clients");
  std::sort(eligible.begin(), eligible.end(),
            [](const auto* a, const auto* b) { return a->user_id < b->user_id; });

  FederationResult out;
  out.global = std::move(init);
  for (int r = 0; r < rounds; ++r) {
    const std::int64_t round = out.global.round;
    const std::int64_t clock = round;
    std::vector<ModelUpdate> queue;
    for (const auto* c : eligible) {
      std::vector<double> delta = c->compute_delta(out.global);
      std::mt19937_64 rng(derive_seed(dp.seed, fnv1a64(c->user_id),
                                      static_cast<std::uint64_t>(round)));
      queue.push_back(make_update(c->user_id, round,
                                  dp_noise(delta, dp.sigma, rng), keystore,
                                  clock));
    }
    if (intercept) intercept(round, queue);

    std::vector<ModelUpdate> accepted;
    const std::size_t audit_begin = out.audit.size();
    for (const auto& u : queue) {
      const VerifyOutcome v = verify_update(u, keystore, round, clock);
      out.audit.push_back({round, u.user_id, v.accepted, v.reason, dp.sigma, 0.0});
      if (v.accepted) accepted.push_back(u);
    }
    const auto aggregated = fed_avg(accepted, out.global.dimension());
    out.global = apply_round(std::move(out.global), aggregated, dp,
                             accepted.size());
    for (std::size_t i = audit_begin; i < out.audit.size(); ++i) {
      out.audit[i].epsilon_cumulative = out.global.cumulative_epsilon();
    }
  }
  return out;
}

}  // namespace fedrisk
