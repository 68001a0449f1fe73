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

// Per-user risk model: multinomial logistic regression over similarity
// vectors, trained on k-means pseudo-labels.
//
// The objective is the class-weighted summed cross-entropy plus
// (lambda / 2) * ||W||^2 (bias unpenalized), minimized by full-batch gradient
// descent with Armijo backtracking.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedrisk/bytes.hpp"
#include "fedrisk/error.hpp"
#include "fedrisk/features.hpp"
#include "fedrisk/risk_labeling.hpp"

namespace fedrisk {

struct RiskModel {
  std::vector<RiskLevel> classes;  // strictest first
  std::vector<std::string> feature_ids;
  std::vector<double> weights;  // classes x features, row-major
  std::vector<double> bias;     // one per class
  double reg_lambda = 1.0;
  std::size_t trained_on = 0;

  std::size_t num_classes() const { return classes.size(); }
  std::size_t num_features() const { return feature_ids.size(); }

  double weight(std::size_t c, std::size_t f) const {
    return weights[c * num_features() + f];
  }

  static RiskModel zeros(std::vector<RiskLevel> classes,
                         std::vector<std::string> feature_ids,
                         double reg_lambda = 1.0) {
    RiskModel m;
    m.weights.assign(classes.size() * feature_ids.size(), 0.0);
    m.bias.assign(classes.size(), 0.0);
    m.classes = std::move(classes);
    m.feature_ids = std::move(feature_ids);
    m.reg_lambda = reg_lambda;
    return m;
  }

  // Weights then bias.
  std::vector<double> parameters() const {
    std::vector<double> p = weights;
    p.insert(p.end(), bias.begin(), bias.end());
    return p;
  }

  void set_parameters(std::span<const double> p) {
    check_same_dim(p.size(), weights.size() + bias.size(), "risk model");
    std::copy(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(weights.size()),
              weights.begin());
    std::copy(p.begin() + static_cast<std::ptrdiff_t>(weights.size()), p.end(),
              bias.begin());
  }

  friend bool operator==(const RiskModel&, const RiskModel&) = default;
};

// Canonical byte layout: classes, feature ids, weights (row-major), bias,
// lambda. Identical models always serialize to identical bytes.
inline Bytes serialize_canonical(const RiskModel& m) {
  ByteWriter w;
  w.u64(m.classes.size());
  for (RiskLevel c : m.classes) w.u8(static_cast<std::uint8_t>(c));
  w.u64(m.feature_ids.size());
  for (const auto& id : m.feature_ids) w.str(id);
  w.f64_array(m.weights);
  w.f64_array(m.bias);
  w.f64(m.reg_lambda);
  return std::move(w).bytes();
}

struct TrainConfig {
  int max_iter = 200;
  double reg_lambda = 1.0;
  // Initial step of the line search.
  double learning_rate = 1.0;
  bool class_balanced = true;
  // Stop once the largest gradient component falls below this.
  double convergence_tol = 1e-6;
  double split_ratio = 0.7;
  std::uint64_t seed = 0;
  // Explicit per-class weights, used when class_balanced is false.
  std::map<RiskLevel, double> class_weight;
};

struct LabeledVector {
  SimilarityVector vector;
  RiskLevel label = RiskLevel::kHigh;
};

// Flattened training data: x is n x d row-major, y holds class indices.
struct TrainingProblem {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::vector<double> x;
  std::vector<std::size_t> y;
  std::vector<double> sample_weight;
  double reg_lambda = 1.0;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // same layout as RiskModel::parameters()
};

namespace trainer_detail {

inline void softmax_inplace(std::span<double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

}  // namespace trainer_detail

inline LossAndGradient loss_and_gradient(const TrainingProblem& p,
                                         std::span<const double> params,
                                         bool want_gradient = true) {
  const std::size_t nw = p.k * p.d;
  std::span<const double> w = params.first(nw);
  std::span<const double> b = params.subspan(nw, p.k);
  LossAndGradient out;
  if (want_gradient) out.gradient.assign(params.size(), 0.0);
  std::vector<double> z(p.k);
  for (std::size_t i = 0; i < p.n; ++i) {
    const double* xi = &p.x[i * p.d];
    for (std::size_t c = 0; c < p.k; ++c) {
      double s = b[c];
      for (std::size_t f = 0; f < p.d; ++f) s += w[c * p.d + f] * xi[f];
      z[c] = s;
    }
    const double mx = *std::max_element(z.begin(), z.end());
    double lse = 0.0;
    for (double v : z) lse += std::exp(v - mx);
    lse = mx + std::log(lse);
    const double sw = p.sample_weight[i];
    out.loss += sw * (lse - z[p.y[i]]);
    if (!want_gradient) continue;
    for (std::size_t c = 0; c < p.k; ++c) {
      const double dz = sw * (std::exp(z[c] - lse) - (c == p.y[i] ? 1.0 : 0.0));
      for (std::size_t f = 0; f < p.d; ++f) out.gradient[c * p.d + f] += dz * xi[f];
      out.gradient[nw + c] += dz;
    }
  }
  double reg = 0.0;
  for (std::size_t j = 0; j < nw; ++j) {
    reg += w[j] * w[j];
    if (want_gradient) out.gradient[j] += p.reg_lambda * w[j];
  }
  out.loss += 0.5 * p.reg_lambda * reg;
  return out;
}

// Balanced weights n / (classes * n_c).
inline std::map<RiskLevel, double> balanced_class_weights(
    std::span<const RiskLevel> labels) {
  std::map<RiskLevel, std::size_t> counts;
  for (RiskLevel l : labels) ++counts[l];
  std::map<RiskLevel, double> w;
  for (const auto& [level, nc] : counts) {
    w[level] = static_cast<double>(labels.size()) /
               (static_cast<double>(counts.size()) * static_cast<double>(nc));
  }
  return w;
}

inline TrainingProblem make_problem(std::span<const LabeledVector> samples,
                                    const std::vector<RiskLevel>& classes,
                                    const TrainConfig& cfg) {
  TrainingProblem p;
  p.n = samples.size();
  p.d = samples.front().vector.scores.size();
  p.k = classes.size();
  p.reg_lambda = cfg.reg_lambda;
  std::vector<RiskLevel> labels;
  for (const auto& s : samples) labels.push_back(s.label);
  const auto weights =
      cfg.class_balanced ? balanced_class_weights(labels) : cfg.class_weight;
  for (const auto& s : samples) {
    p.x.insert(p.x.end(), s.vector.scores.begin(), s.vector.scores.end());
    const auto pos = std::find(classes.begin(), classes.end(), s.label);
    p.y.push_back(static_cast<std::size_t>(pos - classes.begin()));
    const auto wit = weights.find(s.label);
    p.sample_weight.push_back(wit == weights.end() ? 1.0 : wit->second);
  }
  return p;
}

struct TrainReport {
  std::vector<double> loss_trace;  // one entry per accepted step, plus start
  int iterations = 0;
  bool converged = false;
};

// Trains from `init` when given (it must share classes and features), else
// from zero parameters.
inline RiskModel train(std::span<const LabeledVector> samples,
                       const TrainConfig& cfg,
                       const RiskModel* init = nullptr,
                       TrainReport* report = nullptr) {
  if (samples.empty()) fail(ErrorCode::kTooFewSamples, "no training samples");
  const auto& ids = samples.front().vector.feature_ids;
  for (const auto& s : samples) {
    check_same_dim(s.vector.scores.size(), ids.size(), "training vector");
    if (s.vector.feature_ids != ids) {
      fail(ErrorCode::kDimensionMismatch, "training vectors disagree on features");
    }
  }
  std::vector<RiskLevel> classes;
  for (const auto& s : samples) {
    if (std::find(classes.begin(), classes.end(), s.label) == classes.end()) {
      classes.push_back(s.label);
    }
  }
  if (classes.size() < 2) {
    fail(ErrorCode::kSingleClassData, "need at least 2 distinct labels");
  }
  std::sort(classes.begin(), classes.end());

  RiskModel model = RiskModel::zeros(classes, ids, cfg.reg_lambda);
  model.trained_on = samples.size();
  if (init != nullptr) {
    if (init->classes != classes || init->feature_ids != ids) {
      fail(ErrorCode::kFeatureMismatch, "warm start model layout differs");
    }
    model.set_parameters(init->parameters());
  }

  const TrainingProblem problem = make_problem(samples, classes, cfg);
  std::vector<double> theta = model.parameters();
  LossAndGradient cur = loss_and_gradient(problem, theta);
  if (!std::isfinite(cur.loss)) fail(ErrorCode::kNonFiniteLoss, "initial loss");
  TrainReport local;
  local.loss_trace.push_back(cur.loss);
  double step = cfg.learning_rate;
  std::vector<double> next(theta.size());
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    double gmax = 0.0;
    double gnorm2 = 0.0;
    for (double g : cur.gradient) {
      gmax = std::max(gmax, std::abs(g));
      gnorm2 += g * g;
    }
    if (gmax < cfg.convergence_tol) {
      local.converged = true;
      break;
    }
    // Armijo backtracking; the step may grow again after a success.
    bool accepted = false;
    double next_loss = cur.loss;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t j = 0; j < theta.size(); ++j) {
        next[j] = theta[j] - step * cur.gradient[j];
      }
      next_loss = loss_and_gradient(problem, next, false).loss;
      if (std::isfinite(next_loss) && next_loss < cur.loss &&
          next_loss <= cur.loss - 1e-4 * step * gnorm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    local.iterations = iter + 1;
    if (!accepted) {
      local.converged = true;
      break;
    }
    theta.swap(next);
    cur = loss_and_gradient(problem, theta);
    local.loss_trace.push_back(cur.loss);
    step *= 2.0;
  }
  for (double v : theta) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteLoss, "parameters diverged");
  }
  model.set_parameters(theta);
  if (report != nullptr) *report = std::move(local);
  return model;
}

inline std::vector<double> predict_proba(const RiskModel& model,
                                         const SimilarityVector& v) {
  if (v.feature_ids != model.feature_ids ||
      v.scores.size() != model.num_features()) {
    fail(ErrorCode::kFeatureMismatch,
         "vector features do not match the model for session '" +
             v.session_id + "'");
  }
  std::vector<double> z(model.num_classes());
  for (std::size_t c = 0; c < z.size(); ++c) {
    double s = model.bias[c];
    for (std::size_t f = 0; f < v.scores.size(); ++f) {
      s += model.weight(c, f) * v.scores[f];
    }
    z[c] = s;
  }
  trainer_detail::softmax_inplace(z);
  return z;
}

// Argmax over classes; exact ties go to the stricter (higher-risk) level.
inline RiskLevel classify_proba(const std::vector<RiskLevel>& classes,
                                std::span<const double> proba) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < proba.size(); ++c) {
    if (proba[c] > proba[best] ||
        (proba[c] == proba[best] && classes[c] < classes[best])) {
      best = c;
    }
  }
  return classes[best];
}

inline RiskLevel classify(const RiskModel& model, const SimilarityVector& v) {
  return classify_proba(model.classes, predict_proba(model, v));
}

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> test;
};

// Seeded shuffle, then the first ceil(ratio * n) items train.
template <typename T>
Split<T> split(std::span<const T> samples, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "split ratio must be in (0,1)");
  }
  if (samples.size() < 2) {
    fail(ErrorCode::kTooFewSamples, "need at least 2 samples to split");
  }
  std::vector<std::size_t> idx(samples.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  // The epsilon keeps 0.7 * 10 from rounding up to 8.
  const auto n_train = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(samples.size()) - 1e-9));
  Split<T> out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_train ? out.train : out.test).push_back(samples[idx[i]]);
  }
  return out;
}

}  // namespace fedrisk
