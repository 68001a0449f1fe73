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

// Gaussian-mechanism noise on model updates and the closed-form privacy
// budget bookkeeping that goes with it.

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "fedrisk/error.hpp"

namespace fedrisk {

struct DpConfig {
  double sigma = 0.0;
  double delta = 1e-5;
  double sensitivity = 1.0;  // L2 sensitivity of one client's update
  std::uint64_t seed = 0;
};

inline void validate(const DpConfig& cfg) {
  if (!(cfg.sigma >= 0.0) || !std::isfinite(cfg.sigma)) {
    fail(ErrorCode::kInvalidArgument, "sigma must be finite and >= 0");
  }
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "delta must be in (0,1)");
  }
  if (!(cfg.sensitivity > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "sensitivity must be positive");
  }
}

// splitmix64 finalizer; used to derive independent, reproducible streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix64(mix64(mix64(base) ^ a) ^ b);
}

// Adds i.i.d. N(0, sigma^2) to every coordinate. sigma == 0 is the identity.
inline std::vector<double> dp_noise(std::span<const double> params,
                                    double sigma, std::mt19937_64& rng) {
  for (double v : params) {
    if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteInput, "dp_noise input");
  }
  std::vector<double> out(params.begin(), params.end());
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out) v += noise(rng);
  return out;
}

inline std::vector<double> dp_noise(std::span<const double> params,
                                    const DpConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  return dp_noise(params, cfg.sigma, rng);
}

// Per-release budget of the Gaussian mechanism:
// eps = sensitivity * sqrt(2 ln(1.25 / delta)) / sigma.
inline double epsilon_of_sigma(const DpConfig& cfg) {
  validate(cfg);
  if (cfg.sigma == 0.0) fail(ErrorCode::kZeroSigma, "epsilon undefined at sigma 0");
  return cfg.sensitivity * std::sqrt(2.0 * std::log(1.25 / cfg.delta)) /
         cfg.sigma;
}

// Noise scale that keeps `rounds` noisy releases within a total budget eps:
// sigma = 2 * sensitivity * sqrt(2 T ln(2 / delta)) / eps.
inline double sigma_for_budget(double eps, int rounds, const DpConfig& cfg) {
  validate(cfg);
  if (!(eps > 0.0)) fail(ErrorCode::kInvalidArgument, "eps must be positive");
  if (rounds < 1) fail(ErrorCode::kInvalidArgument, "rounds must be >= 1");
  return 2.0 * cfg.sensitivity *
         std::sqrt(2.0 * static_cast<double>(rounds) * std::log(2.0 / cfg.delta)) /
         eps;
}

}  // namespace fedrisk
