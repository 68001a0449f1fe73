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

// Classification metrics, DP noise sweeps and report emission.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedrisk/dp.hpp"
#include "fedrisk/error.hpp"

namespace fedrisk {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // A zero denominator occurred in precision, recall or F1.
  bool degenerate = false;
};

struct MetricsReport {
  std::vector<std::string> classes;
  std::vector<ClassMetrics> per_class;
  // confusion[t][p]: samples of true class t predicted as p.
  std::vector<std::vector<std::size_t>> confusion;
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  std::size_t n = 0;

  const ClassMetrics& of(std::string_view name) const {
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (classes[i] == name) return per_class[i];
    }
    fail(ErrorCode::kInvalidArgument, "unknown class '" + std::string(name) + "'");
  }
};

// (true label, predicted label) pairs, as indices into `classes`.
using LabelPair = std::pair<std::size_t, std::size_t>;

inline MetricsReport compute_metrics(std::span<const LabelPair> predictions,
                                     std::vector<std::string> classes) {
  if (predictions.empty()) fail(ErrorCode::kEmptyPredictions, "no predictions");
  if (classes.empty()) fail(ErrorCode::kInvalidArgument, "empty class set");
  const std::size_t k = classes.size();
  MetricsReport r;
  r.classes = std::move(classes);
  r.n = predictions.size();
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (const auto& [t, p] : predictions) {
    if (t >= k || p >= k) fail(ErrorCode::kInvalidArgument, "label outside the class set");
    ++r.confusion[t][p];
  }
  std::size_t trace = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted = 0;
    std::size_t actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += r.confusion[o][c];
      actual += r.confusion[c][o];
    }
    const std::size_t tp = r.confusion[c][c];
    trace += tp;
    ClassMetrics m;
    m.support = actual;
    if (predicted > 0) {
      m.precision = static_cast<double>(tp) / static_cast<double>(predicted);
    } else {
      m.degenerate = true;
    }
    if (actual > 0) {
      m.recall = static_cast<double>(tp) / static_cast<double>(actual);
    } else {
      m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
      m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
      m.degenerate = true;
    }
    r.per_class.push_back(m);
  }
  for (const auto& m : r.per_class) {
    r.precision_macro += m.precision;
    r.recall_macro += m.recall;
    r.f1_macro += m.f1;
  }
  r.precision_macro /= static_cast<double>(k);
  r.recall_macro /= static_cast<double>(k);
  r.f1_macro /= static_cast<double>(k);
  r.accuracy = static_cast<double>(trace) / static_cast<double>(r.n);
  return r;
}

// Binary evaluation classes; index 0 is the high-risk class.
inline const std::vector<std::string>& high_risk_classes() {
  static const std::vector<std::string> kClasses = {"high", "not_high"};
  return kClasses;
}

struct SweepPoint {
  double sigma = 0.0;
  double epsilon = 0.0;  // +infinity at sigma 0
  MetricsReport metrics;
};

struct SweepResult {
  std::string modality;
  std::vector<SweepPoint> points;  // strictly increasing sigma
};

inline void validate_sigmas(std::span<const double> sigmas) {
  if (sigmas.empty()) fail(ErrorCode::kConfigError, "sigma list is empty");
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    if (!(sigmas[i] >= 0.0) || !std::isfinite(sigmas[i])) {
      fail(ErrorCode::kConfigError, "sigma values must be finite and >= 0");
    }
    if (i > 0 && !(sigmas[i] > sigmas[i - 1])) {
      fail(ErrorCode::kConfigError,
           sigmas[i] == sigmas[i - 1] ? "duplicate sigma value " + std::to_string(sigmas[i])
                                      : "sigma values must be strictly increasing");
    }
  }
}

inline double sweep_epsilon(double sigma, const DpConfig& base) {
  if (sigma == 0.0) return std::numeric_limits<double>::infinity();
  DpConfig cfg = base;
  cfg.sigma = sigma;
  return epsilon_of_sigma(cfg);
}

// run(sigma, noise_seed) trains and evaluates once. Only the noise seed
// varies between points: derive_seed(base_seed, index).
template <typename RunFn>
SweepResult dp_sweep(std::string modality, std::span<const double> sigmas,
                     std::uint64_t base_seed, const DpConfig& dp, RunFn&& run) {
  validate_sigmas(sigmas);
  SweepResult out;
  out.modality = std::move(modality);
  for (std::size_t i = 0; i < sigmas.size(); ++i) {
    SweepPoint p;
    p.sigma = sigmas[i];
    p.epsilon = sweep_epsilon(sigmas[i], dp);
    p.metrics = run(sigmas[i], derive_seed(base_seed, i));
    out.points.push_back(std::move(p));
  }
  return out;
}

enum class ReportFormat { kCsv, kJson, kMarkdown };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::kCsv;
  if (s == "json") return ReportFormat::kJson;
  if (s == "markdown" || s == "md") return ReportFormat::kMarkdown;
  fail(ErrorCode::kUnsupportedFormat, "unsupported report format '" + std::string(s) + "'");
}

inline std::string format_g6(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> kColumns = {
      "modality",       "sigma",        "epsilon",     "accuracy",
      "precision_macro", "recall_macro", "f1_macro",    "precision_high",
      "recall_high",    "f1_high",      "n_test"};
  return kColumns;
}

namespace report_detail {

// Formatted cells in report_columns() order.
inline std::vector<std::string> cells(const std::string& modality, const SweepPoint& p) {
  const ClassMetrics& high = p.metrics.per_class.at(0);
  return {modality,
          format_g6(p.sigma),
          format_g6(p.epsilon),
          format_g6(p.metrics.accuracy),
          format_g6(p.metrics.precision_macro),
          format_g6(p.metrics.recall_macro),
          format_g6(p.metrics.f1_macro),
          format_g6(high.precision),
          format_g6(high.recall),
          format_g6(high.f1),
          std::to_string(p.metrics.n)};
}

}  // namespace report_detail

// Per-class column values come from class index 0, the high-risk class.
// JSON carries the same 6-significant-digit values as the CSV.
inline std::string emit_report(std::span<const SweepResult> results, ReportFormat format) {
  std::size_t rows = 0;
  for (const auto& r : results) rows += r.points.size();
  if (rows == 0) fail(ErrorCode::kInvalidArgument, "no results to report");
  const auto& cols = report_columns();
  std::ostringstream out;
  switch (format) {
    case ReportFormat::kCsv: {
      for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
      out << '\n';
      for (const auto& r : results) {
        for (const auto& p : r.points) {
          const auto v = report_detail::cells(r.modality, p);
          for (std::size_t c = 0; c < v.size(); ++c) out << (c ? "," : "") << v[c];
          out << '\n';
        }
      }
      break;
    }
    case ReportFormat::kJson: {
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (const auto& r : results) {
        for (const auto& p : r.points) {
          const auto v = report_detail::cells(r.modality, p);
          nlohmann::ordered_json row;
          row[cols[0]] = v[0];
          for (std::size_t c = 1; c + 1 < cols.size(); ++c) {
            if (v[c] == "inf") {
              row[cols[c]] = "inf";
            } else {
              row[cols[c]] = std::stod(v[c]);
            }
          }
          row[cols.back()] = p.metrics.n;
          arr.push_back(std::move(row));
        }
      }
      out << arr.dump(2) << '\n';
      break;
    }
    case ReportFormat::kMarkdown: {
      out << "| Modality | Sigma | Epsilon | Accuracy | Precision (macro) | Recall (macro) "
             "| F1 (macro) | Precision (high) | Recall (high) | F1 (high) | Test sessions |\n";
      out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
      for (const auto& r : results) {
        for (const auto& p : r.points) {
          out << '|';
          for (const auto& cell : report_detail::cells(r.modality, p)) out << ' ' << cell << " |";
          out << '\n';
        }
      }
      break;
    }
  }
  return out.str();
}

inline std::string emit_report(const SweepResult& result, ReportFormat format) {
  return emit_report(std::span<const SweepResult>(&result, 1), format);
}

inline nlohmann::ordered_json metrics_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["n"] = m.n;
  j["accuracy"] = std::stod(format_g6(m.accuracy));
  j["precision_macro"] = std::stod(format_g6(m.precision_macro));
  j["recall_macro"] = std::stod(format_g6(m.recall_macro));
  j["f1_macro"] = std::stod(format_g6(m.f1_macro));
  nlohmann::ordered_json classes = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < m.classes.size(); ++i) {
    const auto& c = m.per_class[i];
    classes[m.classes[i]] = {{"precision", std::stod(format_g6(c.precision))},
                             {"recall", std::stod(format_g6(c.recall))},
                             {"f1", std::stod(format_g6(c.f1))},
                             {"support", c.support},
                             {"degenerate", c.degenerate}};
  }
  j["classes"] = std::move(classes);
  j["confusion"] = m.confusion;
  return j;
}

}  // namespace fedrisk
