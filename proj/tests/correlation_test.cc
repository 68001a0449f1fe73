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

#include "fedrisk/correlation.hpp"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "test_util.hpp"

namespace fedrisk {
namespace {

using ::fedrisk::testing::code_of;

const std::vector<std::string> kIds = {"a1", "a2", "b1", "b2"};

std::vector<SimilarityVector> independent(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<SimilarityVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"u", std::to_string(i), {u(rng), u(rng), u(rng), u(rng)}, kIds});
  }
  return out;
}

// Textbook two-pass correlation written out longhand.
double reference_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

TEST(CrossGroupCorrelationTest, IndependentGroupsAreWeaklyCorrelated) {
  const auto vs = independent(1000, 99);
  const FeatureGroups groups = {{"a1", "a2"}, {"b1", "b2"}};
  const auto d = cross_group_correlation(vs, groups);
  EXPECT_LT(d.eps_avg, 0.1);
  EXPECT_DOUBLE_EQ(d.bound, d.eps_avg);

  std::vector<std::vector<double>> cols(4);
  for (const auto& v : vs) {
    for (std::size_t c = 0; c < 4; ++c) cols[c].push_back(v.scores[c]);
  }
  double sum = 0.0;
  for (std::size_t a : {0u, 1u}) {
    for (std::size_t b : {2u, 3u}) sum += std::abs(reference_pearson(cols[a], cols[b]));
  }
  EXPECT_NEAR(d.eps_avg, sum / 4.0, 1e-12);
}

TEST(CrossGroupCorrelationTest, DuplicatedFeatureAcrossGroupsIsPerfect) {
  auto vs = independent(200, 3);
  for (auto& v : vs) v.scores[2] = v.scores[0];
  const auto d = cross_group_correlation(vs, {{"a1"}, {"b1"}, {"a2", "b2"}});
  EXPECT_NEAR(d.pair_mean[0][1], 1.0, 1e-12);
  EXPECT_NEAR(d.eps_avg, 1.0, 1e-12);
  EXPECT_EQ(d.worst_a, 0u);
  EXPECT_EQ(d.worst_b, 1u);
  EXPECT_NEAR(d.bound, 3.0, 1e-12);
}

TEST(CrossGroupCorrelationTest, ShrinksWithSampleCount) {
  const FeatureGroups groups = {{"a1", "a2"}, {"b1", "b2"}};
  double small = 0.0;
  double large = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    small += cross_group_correlation(independent(30, s), groups).eps_avg;
    large += cross_group_correlation(independent(3000, s + 100), groups).eps_avg;
  }
  EXPECT_LT(large, small);
}

TEST(CrossGroupCorrelationTest, ConstantColumnsAreExcludedAndReported) {
  auto vs = independent(50, 8);
  for (auto& v : vs) v.scores[1] = 1.0;
  const auto d = cross_group_correlation(vs, {{"a1", "a2"}, {"b1", "b2"}});
  EXPECT_EQ(d.degenerate, std::vector<std::string>{"a2"});
  EXPECT_TRUE(std::isfinite(d.eps_avg));

  for (auto& v : vs) v.scores = {1.0, 1.0, 0.0, 0.0};
  EXPECT_EQ(code_of([&] { cross_group_correlation(vs, {{"a1", "a2"}, {"b1", "b2"}}); }),
            ErrorCode::kDegenerateAll);
}

TEST(CrossGroupCorrelationTest, Preconditions) {
  const auto vs = independent(10, 1);
  EXPECT_EQ(code_of([&] {
              cross_group_correlation(std::span(vs).first(2), {{"a1", "a2"}, {"b1", "b2"}});
            }),
            ErrorCode::kInsufficientSamples);
  EXPECT_EQ(code_of([&] { cross_group_correlation(vs, {{"a1", "a2", "b1", "b2"}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { cross_group_correlation(vs, {{"a1", "a2"}, {"b1"}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { cross_group_correlation(vs, {{"a1", "a2"}, {"b1", "a1", "b2"}}); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([&] { cross_group_correlation(vs, {{"a1", "a2"}, {"b1", "zz", "b2"}}); }),
            ErrorCode::kUnknownFeature);
}

}  // namespace
}  // namespace fedrisk
