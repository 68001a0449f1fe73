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

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "fedrisk/bytes.hpp"
#include "fedrisk/dp.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/federation.hpp"
#include "fedrisk/local_trainer.hpp"
#include "fedrisk/mac.hpp"

namespace fedrisk {

// A stored global model: one header line "FEDRISK-MODEL v1 tag=<hex>"
// followed by a JSON body. The tag is HMAC-SHA256 over the body bytes
// exactly as written, and the body records the SHA-256 of the audit log.
inline constexpr std::string_view kModelMagic = "FEDRISK-MODEL v1 tag=";

struct StoredModel {
  std::string modality;
  RiskModel model;
  std::int64_t round = 0;
  std::vector<RoundRecord> history;
  std::string audit_sha256;  // hex
};

inline std::string model_body_json(const StoredModel& m) {
  nlohmann::ordered_json doc;
  doc["format"] = "fedrisk-model";
  doc["schema_version"] = 1;
  doc["modality"] = m.modality;
  nlohmann::ordered_json classes = nlohmann::ordered_json::array();
  for (RiskLevel c : m.model.classes) classes.push_back(risk_level_name(c));
  doc["classes"] = std::move(classes);
  doc["feature_ids"] = m.model.feature_ids;
  doc["weights"] = m.model.weights;
  doc["bias"] = m.model.bias;
  doc["reg_lambda"] = m.model.reg_lambda;
  doc["round"] = m.round;
  nlohmann::ordered_json history = nlohmann::ordered_json::array();
  double eps = 0.0;
  for (const auto& r : m.history) {
    eps += r.epsilon_increment;
    history.push_back({{"participants", r.participants},
                       {"sigma", r.sigma},
                       {"epsilon_increment", r.epsilon_increment}});
  }
  doc["history"] = std::move(history);
  doc["epsilon_cumulative"] = eps;
  doc["canonical_sha256"] = to_hex(sha256(serialize_canonical(m.model)));
  doc["audit_sha256"] = m.audit_sha256;
  return doc.dump(1) + "\n";
}

inline std::string model_tag_hex(const MacKey& key, std::string_view body) {
  return to_hex(hmac_sha256(key, to_bytes(body)));
}

inline std::string write_model_file(const StoredModel& m, const MacKey& key) {
  const std::string body = model_body_json(m);
  return std::string(kModelMagic) + model_tag_hex(key, body) + "\n" + body;
}

// The deterministic model key of a run with the given root seed.
inline MacKey model_key_for_seed(std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, fnv1a64("model-key")));
  return derive_key(rng);
}

inline MacKey parse_key_hex(std::string_view text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r' || text.back() == ' ')) {
    text.remove_suffix(1);
  }
  if (text.size() != 2 * kKeySize) {
    fail(ErrorCode::kConfigError, "key must be " + std::to_string(2 * kKeySize) + " hex digits");
  }
  const Bytes b = from_hex(text);
  MacKey key{};
  std::copy(b.begin(), b.end(), key.begin());
  return key;
}

struct ModelVerdict {
  bool ok = false;
  std::string reason;
};

namespace model_detail {

inline StoredModel parse_body(std::string_view body) {
  StoredModel m;
  const auto doc = nlohmann::json::parse(body);
  if (doc.at("format") != "fedrisk-model" || doc.at("schema_version") != 1) {
    fail(ErrorCode::kUnsupportedFormat, "not a version 1 model body");
  }
  m.modality = doc.at("modality").get<std::string>();
  for (const auto& c : doc.at("classes")) {
    m.model.classes.push_back(parse_risk_level(c.get<std::string>()));
  }
  m.model.feature_ids = doc.at("feature_ids").get<std::vector<std::string>>();
  m.model.weights = doc.at("weights").get<std::vector<double>>();
  m.model.bias = doc.at("bias").get<std::vector<double>>();
  m.model.reg_lambda = doc.at("reg_lambda").get<double>();
  m.round = doc.at("round").get<std::int64_t>();
  for (const auto& h : doc.at("history")) {
    m.history.push_back({h.at("participants").get<std::size_t>(), h.at("sigma").get<double>(),
                         h.at("epsilon_increment").get<double>()});
  }
  m.audit_sha256 = doc.at("audit_sha256").get<std::string>();
  if (doc.at("canonical_sha256").get<std::string>() !=
      to_hex(sha256(serialize_canonical(m.model)))) {
    fail(ErrorCode::kInvalidArgument, "canonical digest does not match the stored parameters");
  }
  return m;
}

}  // namespace model_detail

// Checks the tag first; the body is trusted only after it verifies. When
// `audit` is given its digest must match the one recorded in the body.
inline ModelVerdict verify_model_file(std::string_view file, const MacKey& key,
                                      const std::string* audit = nullptr) {
  if (file.substr(0, kModelMagic.size()) != kModelMagic) {
    return {false, "missing model header"};
  }
  const auto eol = file.find('\n');
  if (eol == std::string_view::npos) return {false, "truncated model file"};
  const std::string_view tag_hex = file.substr(kModelMagic.size(), eol - kModelMagic.size());
  const std::string_view body = file.substr(eol + 1);
  Bytes stored;
  try {
    stored = from_hex(tag_hex);
  } catch (const Error&) {
    return {false, "malformed tag"};
  }
  if (stored.size() != kTagSize) return {false, "malformed tag"};
  const MacTag expected = hmac_sha256(key, to_bytes(body));
  if (!constant_time_equal(stored, expected)) return {false, "bad_tag"};
  StoredModel m;
  try {
    m = model_detail::parse_body(body);
  } catch (const std::exception& e) {
    return {false, std::string("malformed body: ") + e.what()};
  }
  if (audit != nullptr && to_hex(sha256(to_bytes(*audit))) != m.audit_sha256) {
    return {false, "audit log digest mismatch"};
  }
  return {true, "ok"};
}

}  // namespace fedrisk
