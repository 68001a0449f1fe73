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

// Dynamic time warping over multichannel sequences: exact DTW, the multilevel
// FastDTW approximation, DTW barycenter averaging, and the similarity scores
// built on top of them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "fedrisk/error.hpp"
#include "fedrisk/similarity.hpp"

namespace fedrisk {

// One time step of a sequence. All steps of a sequence share a dimension.
using Point = std::vector<double>;
using Sequence = std::vector<Point>;
using WarpingPath = std::vector<std::pair<std::size_t, std::size_t>>;

inline Sequence scalar_sequence(std::span<const double> values) {
  Sequence s;
  s.reserve(values.size());
  for (double v : values) s.push_back(Point{v});
  return s;
}

inline std::size_t sequence_dim(const Sequence& s) {
  if (s.empty()) fail(ErrorCode::kEmptySequence, "sequence is empty");
  const std::size_t d = s.front().size();
  for (const auto& p : s) check_same_dim(p.size(), d, "sequence element");
  return d;
}

inline void check_sequence_pair(const Sequence& a, const Sequence& b) {
  check_same_dim(sequence_dim(a), sequence_dim(b), "dtw");
}

inline double point_distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace dtw_detail {

// Column band [lo[i], hi[i]] (inclusive) allowed for each row i.
struct Window {
  std::vector<std::size_t> lo;
  std::vector<std::size_t> hi;
};

inline Window full_window(std::size_t rows, std::size_t cols) {
  return Window{std::vector<std::size_t>(rows, 0),
                std::vector<std::size_t>(rows, cols - 1)};
}

struct DtwResult {
  double distance = 0.0;
  WarpingPath path;
};

// Accumulated-cost recurrence D(i,j) = C(i,j) + min(D(i-1,j), D(i,j-1),
// D(i-1,j-1)) restricted to the window.
inline DtwResult windowed_dtw(const Sequence& a, const Sequence& b,
                              const Window& w, bool want_path) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = a.size();
  std::vector<std::vector<double>> acc(n);
  auto at = [&](std::size_t i, std::size_t j) -> double {
    if (j < w.lo[i] || j > w.hi[i]) return kInf;
    return acc[i][j - w.lo[i]];
  };
  for (std::size_t i = 0; i < n; ++i) {
    acc[i].assign(w.hi[i] - w.lo[i] + 1, kInf);
    for (std::size_t j = w.lo[i]; j <= w.hi[i]; ++j) {
      const double cost = point_distance(a[i], b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = kInf;
        if (i > 0) best = std::min(best, at(i - 1, j));
        if (j > 0) best = std::min(best, at(i, j - 1));
        if (i > 0 && j > 0) best = std::min(best, at(i - 1, j - 1));
      }
      acc[i][j - w.lo[i]] = cost + best;
    }
  }
  DtwResult r;
  r.distance = at(n - 1, b.size() - 1);
  if (want_path) {
    std::size_t i = n - 1;
    std::size_t j = b.size() - 1;
    r.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
      if (i == 0) {
        --j;
      } else if (j == 0) {
        --i;
      } else {
        const double diag = at(i - 1, j - 1);
        const double up = at(i - 1, j);
        const double left = at(i, j - 1);
        if (diag <= up && diag <= left) {
          --i;
          --j;
        } else if (up <= left) {
          --i;
        } else {
          --j;
        }
      }
      r.path.emplace_back(i, j);
    }
    std::reverse(r.path.begin(), r.path.end());
  }
  return r;
}

inline Sequence reduce_by_half(const Sequence& s) {
  Sequence out;
  out.reserve((s.size() + 1) / 2);
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
    Point p(s[i].size());
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = 0.5 * (s[i][k] + s[i + 1][k]);
    }
    out.push_back(std::move(p));
  }
  if (s.size() % 2 == 1) out.push_back(s.back());
  return out;
}

// Projects a low-resolution warping path onto the full-resolution grid and
// widens it by `radius` cells on each side.
inline Window expand_window(const WarpingPath& low_path, std::size_t rows,
                            std::size_t cols, std::size_t radius) {
  constexpr std::size_t kUnset = std::numeric_limits<std::size_t>::max();
  Window w{std::vector<std::size_t>(rows, kUnset),
           std::vector<std::size_t>(rows, 0)};
  const auto r = static_cast<std::ptrdiff_t>(radius);
  for (const auto& [li, lj] : low_path) {
    const auto i = static_cast<std::ptrdiff_t>(li);
    const auto j = static_cast<std::ptrdiff_t>(lj);
    const std::ptrdiff_t row_begin = std::max<std::ptrdiff_t>(0, 2 * (i - r));
    const std::ptrdiff_t row_end = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(rows) - 1, 2 * (i + r) + 1);
    const std::ptrdiff_t col_begin = std::max<std::ptrdiff_t>(0, 2 * (j - r));
    const std::ptrdiff_t col_end = std::min<std::ptrdiff_t>(
        static_cast<std::ptrdiff_t>(cols) - 1, 2 * (j + r) + 1);
    if (col_begin > col_end) continue;
    for (std::ptrdiff_t row = row_begin; row <= row_end; ++row) {
      auto& lo = w.lo[static_cast<std::size_t>(row)];
      auto& hi = w.hi[static_cast<std::size_t>(row)];
      lo = std::min(lo, static_cast<std::size_t>(col_begin));
      hi = std::max(hi, static_cast<std::size_t>(col_end));
    }
  }
  // Rows never touched inherit their predecessor's band.
  for (std::size_t i = 0; i < rows; ++i) {
    if (w.lo[i] == kUnset) {
      w.lo[i] = i > 0 ? w.lo[i - 1] : 0;
      w.hi[i] = i > 0 ? w.hi[i - 1] : 0;
    }
  }
  // Make the band admit at least one monotone path from (0,0) to the corner.
  w.lo[0] = 0;
  w.hi[rows - 1] = cols - 1;
  for (std::size_t i = 1; i < rows; ++i) {
    w.lo[i] = std::max(w.lo[i], w.lo[i - 1]);
    w.hi[i] = std::max(w.hi[i], w.hi[i - 1]);
    w.lo[i] = std::min(w.lo[i], w.hi[i - 1] + 1);
    if (w.lo[i] > w.hi[i]) w.hi[i] = w.lo[i];
  }
  return w;
}

inline DtwResult fast_dtw_impl(const Sequence& a, const Sequence& b,
                               std::size_t radius) {
  const std::size_t base = 2 * radius + 2;
  if (a.size() <= base || b.size() <= base) {
    return windowed_dtw(a, b, full_window(a.size(), b.size()), true);
  }
  const DtwResult low =
      fast_dtw_impl(reduce_by_half(a), reduce_by_half(b), radius);
  const Window w = expand_window(low.path, a.size(), b.size(), radius);
  return windowed_dtw(a, b, w, true);
}

}  // namespace dtw_detail

inline double dtw_exact(const Sequence& a, const Sequence& b) {
  check_sequence_pair(a, b);
  return dtw_detail::windowed_dtw(
             a, b, dtw_detail::full_window(a.size(), b.size()), false)
      .distance;
}

inline WarpingPath dtw_path(const Sequence& a, const Sequence& b) {
  check_sequence_pair(a, b);
  return dtw_detail::windowed_dtw(
             a, b, dtw_detail::full_window(a.size(), b.size()), true)
      .path;
}

// FastDTW. Falls back to exact DTW when either input has at most
// 2 * radius + 2 steps, so short sequences are never approximated.
inline double dtw_fast(const Sequence& a, const Sequence& b,
                       std::size_t radius) {
  check_sequence_pair(a, b);
  if (radius < 1) fail(ErrorCode::kInvalidArgument, "radius must be >= 1");
  return dtw_detail::fast_dtw_impl(a, b, radius).distance;
}

inline double dba_objective(const Sequence& center,
                            std::span<const Sequence> sequences) {
  double total = 0.0;
  for (const auto& s : sequences) total += dtw_exact(center, s);
  return total / static_cast<double>(sequences.size());
}

// Index of the member with the smallest mean DTW distance to the set.
inline std::size_t medoid_index(std::span<const Sequence> sequences) {
  std::size_t best = 0;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    const double obj = dba_objective(sequences[i], sequences);
    if (obj < best_obj) {
      best_obj = obj;
      best = i;
    }
  }
  return best;
}

struct DbaResult {
  Sequence centroid;
  // objective_trace[0] is the seed's mean DTW; one entry per accepted step.
  std::vector<double> objective_trace;
};

// DTW barycenter averaging, seeded with the medoid. A refinement step is kept
// only if it does not raise the mean DTW distance, which makes the objective
// trace non-increasing.
inline DbaResult dba_centroid_traced(std::span<const Sequence> sequences,
                                     int iterations = 10) {
  if (sequences.empty()) {
    fail(ErrorCode::kEmptyReferenceSet, "dba: no sequences");
  }
  const std::size_t dim = sequence_dim(sequences.front());
  for (const auto& s : sequences) check_same_dim(sequence_dim(s), dim, "dba");

  DbaResult r;
  r.centroid = sequences[medoid_index(sequences)];
  double objective = dba_objective(r.centroid, sequences);
  r.objective_trace.push_back(objective);
  for (int it = 0; it < iterations && objective > 0.0; ++it) {
    std::vector<Point> sums(r.centroid.size(), Point(dim, 0.0));
    std::vector<std::size_t> counts(r.centroid.size(), 0);
    for (const auto& s : sequences) {
      for (const auto& [ci, sj] : dtw_path(r.centroid, s)) {
        for (std::size_t k = 0; k < dim; ++k) sums[ci][k] += s[sj][k];
        ++counts[ci];
      }
    }
    Sequence next(r.centroid.size(), Point(dim));
    for (std::size_t i = 0; i < next.size(); ++i) {
      for (std::size_t k = 0; k < dim; ++k) {
        next[i][k] = sums[i][k] / static_cast<double>(counts[i]);
      }
    }
    const double next_objective = dba_objective(next, sequences);
    if (next_objective > objective) break;
    const bool stalled = next == r.centroid;
    r.centroid = std::move(next);
    objective = next_objective;
    r.objective_trace.push_back(objective);
    if (stalled) break;
  }
  return r;
}

inline Sequence dba_centroid(std::span<const Sequence> sequences,
                             int iterations = 10) {
  return dba_centroid_traced(sequences, iterations).centroid;
}

inline double sim_from_dtw(double distance, double max_dtw) {
  if (!(max_dtw > 0.0)) {
    fail(ErrorCode::kNonPositiveMaxDtw,
         "max DTW must be positive, got " + std::to_string(max_dtw));
  }
  return clamp01(1.0 - distance / max_dtw);
}

inline double sim_sequence(const Sequence& live, const Sequence& centroid,
                           double max_dtw, std::size_t radius) {
  if (!(max_dtw > 0.0)) {
    fail(ErrorCode::kNonPositiveMaxDtw,
         "max DTW must be positive, got " + std::to_string(max_dtw));
  }
  return sim_from_dtw(dtw_fast(live, centroid, radius), max_dtw);
}

// The k best similarities from a list of DTW distances, descending, padded
// with zeros when fewer than k distances are available.
inline std::vector<double> topk_from_distances(std::span<const double> dists,
                                               std::size_t k, double max_dtw) {
  std::vector<double> sims;
  sims.reserve(dists.size());
  for (double d : dists) sims.push_back(sim_from_dtw(d, max_dtw));
  std::sort(sims.begin(), sims.end(), std::greater<>());
  sims.resize(k, 0.0);
  return sims;
}

inline std::vector<double> sim_topk(const Sequence& live,
                                    std::span<const Sequence> references,
                                    std::size_t k, double max_dtw,
                                    std::size_t radius) {
  if (references.empty()) {
    fail(ErrorCode::kEmptyReferenceSet, "sim_topk: no references");
  }
  if (k < 1) fail(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(max_dtw > 0.0)) {
    fail(ErrorCode::kNonPositiveMaxDtw, "max DTW must be positive");
  }
  std::vector<double> dists;
  dists.reserve(references.size());
  for (const auto& ref : references) {
    dists.push_back(dtw_fast(live, ref, radius));
  }
  return topk_from_distances(dists, k, max_dtw);
}

// Largest pairwise DTW among reference sessions. A single session (or a set
// of identical ones) has no spread, so the scale is taken from the distance
// to a constant sequence at `default_scale`, or `default_scale` itself.
inline double max_dtw_distance(std::span<const Sequence> references,
                               std::size_t radius, double default_scale) {
  if (references.empty()) {
    fail(ErrorCode::kEmptyReferenceSet, "max_dtw: no references");
  }
  double best = 0.0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    for (std::size_t j = i + 1; j < references.size(); ++j) {
      best = std::max(best, dtw_fast(references[i], references[j], radius));
    }
  }
  if (best > 0.0) return best;
  const Sequence& only = references.front();
  const Sequence flat(only.size(), Point(only.front().size(), default_scale));
  const double d = dtw_fast(only, flat, radius);
  return d > 0.0 ? d : default_scale;
}

}  // namespace fedrisk
