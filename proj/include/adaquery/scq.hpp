// Copyright 2026 The Adaquery Authors
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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "adaquery/dataset.hpp"
#include "adaquery/error.hpp"
#include "adaquery/noise.hpp"
#include "adaquery/privacy.hpp"
#include "adaquery/query.hpp"
#include "adaquery/rng.hpp"

namespace adaquery {

// Parameters for a session of sampling counting queries. Each call examines
// a single point and answers with one randomized bit.
struct ScqConfig {
  double alpha = 0;      // session accuracy target, must be <= 1/2
  double beta = 0;
  std::size_t k = 0;     // query budget
  double flip_prob = 0;  // per-call response flip probability (alpha / 2)
  double eps = 0;        // session privacy target wiring
  double delta = 0;
  bool below_sample_guidance = false;
};

// Derives an SCQ session config from an accuracy target. The per-call flip
// probability is alpha/2: the session-level argument composes per-call
// accuracy alpha/2 into session accuracy alpha.
inline ScqConfig scq_config(double alpha, double beta, std::size_t k,
                            std::size_t n) {
  if (!(alpha > 0 && alpha <= 0.5)) {
    throw InvalidParameter("SCQ accuracy alpha must lie in (0, 1/2]");
  }
  if (!(beta > 0 && beta < 1)) {
    throw InvalidParameter("beta must lie in (0, 1)");
  }
  if (k == 0) {
    throw InvalidParameter("k must be at least 1");
  }
  ScqConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.k = k;
  cfg.flip_prob = alpha / 2;
  cfg.eps = alpha / 64;
  cfg.delta = alpha * beta / 16;
  const double kd = static_cast<double>(k);
  const double a2 = alpha * alpha;
  const double privacy_side =
      4 * std::sqrt(2 * kd * std::log(16 / (alpha * beta))) * 128 / a2;
  const double transfer_side = 1024 * std::log(kd / beta) / a2;
  cfg.below_sample_guidance =
      static_cast<double>(n) < std::max(privacy_side, transfer_side);
  return cfg;
}

// Answers one sampling counting query: draw a single point s uniformly from
// the sample, then release q(s) with probability 1 - flip_prob and 1 - q(s)
// otherwise. Examines exactly one point.
inline int answer_scq(const Dataset& data, const CountingQuery& q,
                      double flip_prob, BudgetLedger& ledger, RngState& rng) {
  if (!(flip_prob >= 0 && flip_prob <= 0.5)) {
    throw InvalidParameter("flip probability must lie in [0, 1/2]");
  }
  ledger.charge();
  const ElementId s = data.points[rng.uniform_below(data.size())];
  const int bit = q(s);
  return rng.bernoulli(flip_prob) ? 1 - bit : bit;
}

inline int answer_scq(const Dataset& data, const CountingQuery& q,
                      const ScqConfig& cfg, BudgetLedger& ledger,
                      RngState& rng) {
  return answer_scq(data, q, cfg.flip_prob, ledger, rng);
}

// Estimates a counting query as the mean of ell independent SCQ answers.
// The result is always an integer multiple of 1/ell (an honest count). All
// ell inner calls are charged to the shared ledger.
inline double counting_via_scq(const Dataset& data, const CountingQuery& q,
                               std::size_t ell, double flip_prob,
                               BudgetLedger& ledger, RngState& rng) {
  if (ell == 0) {
    throw InvalidParameter("counting via SCQ requires ell >= 1");
  }
  if (ledger.remaining() < ell) {
    throw BudgetExhausted("counting via SCQ needs " + std::to_string(ell) +
                          " calls but only " +
                          std::to_string(ledger.remaining()) + " remain");
  }
  std::size_t ones = 0;
  for (std::size_t i = 0; i < ell; ++i) {
    ones += static_cast<std::size_t>(answer_scq(data, q, flip_prob, ledger, rng));
  }
  return static_cast<double>(ones) / static_cast<double>(ell);
}

inline double counting_via_scq(const Dataset& data, const CountingQuery& q,
                               std::size_t ell, const ScqConfig& cfg,
                               BudgetLedger& ledger, RngState& rng) {
  return counting_via_scq(data, q, ell, cfg.flip_prob, ledger, rng);
}

// The naive full-pass baseline: compute q(S) exactly (n point evaluations),
// add Lap(1/(n * eps_pq)), clamp the noised value into [0, 1], and return a
// Bernoulli draw with that success probability.
inline int naive_scq_via_count(const Dataset& data, const CountingQuery& q,
                               double eps_pq, RngState& rng) {
  if (!(eps_pq > 0)) {
    throw InvalidParameter("per-query epsilon must be positive");
  }
  const double exact = empirical_mean(data, q);
  const double noised =
      exact + sample_laplace(
                  LaplaceScale(1.0 / (static_cast<double>(data.size()) * eps_pq)),
                  rng);
  const double p = std::clamp(noised, 0.0, 1.0);
  return rng.bernoulli(p) ? 1 : 0;
}

}  // namespace adaquery
