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
#include <chrono>
#include <cmath>
#include <cstddef>

#include "adaquery/dataset.hpp"
#include "adaquery/error.hpp"
#include "adaquery/noise.hpp"
#include "adaquery/privacy.hpp"
#include "adaquery/query.hpp"
#include "adaquery/rng.hpp"
#include "adaquery/transcript.hpp"

namespace adaquery {

// Which accuracy guarantee the session's parameters are derived for:
// a uniform high-probability bound over all k answers, or a per-round
// in-expectation bound.
enum class AccuracyMode { kHighProbability, kInExpectation };

// Parameters of the subsampled-Laplace statistical-query mechanism.
struct SqMechConfig {
  double alpha = 0;
  double beta = 0;
  std::size_t k = 0;       // adaptive query budget
  std::size_t ell = 0;     // subsample size per query
  double eps = 0;          // session-level privacy target
  double delta = 0;
  bool with_replacement = true;
  bool clip_output = false;  // the raw mechanism returns the unclipped value
  bool noiseless = false;    // test hook: suppress the Laplace draw
  AccuracyMode mode = AccuracyMode::kHighProbability;
  // True when n is below the sample-size guidance for the chosen mode; the
  // session still runs, but the accuracy guarantee is not backed.
  bool below_sample_guidance = false;
  // In-expectation mode only: the two constituent terms of the oracle's
  // accuracy estimate, k^{1/4}/sqrt(n) and 1/sqrt(ell), reported raw.
  double expectation_term_sample = 0;
  double expectation_term_subsample = 0;
};

// Per-query privacy assignment: eps' = eps * n / (4 * ell * sqrt(2k ln(1/delta))).
inline double per_query_epsilon_prime(const SqMechConfig& cfg, std::size_t n) {
  return cfg.eps * static_cast<double>(n) /
         (4 * static_cast<double>(cfg.ell) *
          std::sqrt(2 * static_cast<double>(cfg.k) * std::log(1 / cfg.delta)));
}

// Scale of the Laplace noise added to the subsample mean: 1 / (ell * eps').
inline double noise_scale(const SqMechConfig& cfg, std::size_t n) {
  return 1.0 /
         (static_cast<double>(cfg.ell) * per_query_epsilon_prime(cfg, n));
}

// Derives session parameters from an accuracy target.
//
// High-probability mode: ell = ceil(2 ln(4k/beta) / alpha^2), eps = alpha/64,
// delta = alpha*beta/32. In-expectation mode: eps = alpha/8, delta = alpha/4,
// with a caller-supplied ell >= 1.
inline SqMechConfig config_from_accuracy(double alpha, double beta,
                                         std::size_t k, std::size_t n,
                                         AccuracyMode mode,
                                         std::size_t ell_in_expectation = 0) {
  if (!(alpha > 0 && alpha <= 1)) {
    throw InvalidParameter("alpha must lie in (0, 1]");
  }
  if (!(beta > 0 && beta < 1)) {
    throw InvalidParameter("beta must lie in (0, 1)");
  }
  if (k == 0 || n == 0) {
    throw InvalidParameter("k and n must be at least 1");
  }
  SqMechConfig cfg;
  cfg.alpha = alpha;
  cfg.beta = beta;
  cfg.k = k;
  cfg.mode = mode;
  const double kd = static_cast<double>(k);
  if (mode == AccuracyMode::kHighProbability) {
    cfg.ell = static_cast<std::size_t>(
        std::ceil(2 * std::log(4 * kd / beta) / (alpha * alpha)));
    cfg.eps = alpha / 64;
    cfg.delta = alpha * beta / 32;
  } else {
    if (ell_in_expectation == 0) {
      throw InvalidParameter(
          "in-expectation mode requires a caller-supplied ell >= 1");
    }
    cfg.ell = ell_in_expectation;
    cfg.eps = alpha / 8;
    cfg.delta = alpha / 4;
    cfg.expectation_term_sample = std::pow(kd, 0.25) / std::sqrt(double(n));
    cfg.expectation_term_subsample = 1.0 / std::sqrt(double(cfg.ell));
  }
  const double guidance = 4 * std::sqrt(2 * kd * std::log(1 / cfg.delta)) *
                          std::log(2 * kd / beta) / (alpha * cfg.eps);
  cfg.below_sample_guidance = static_cast<double>(n) < guidance;
  return cfg;
}

// Answers one statistical query: subsample ell points, take the empirical
// mean, add Lap(1/(ell * eps')). Examines exactly ell points regardless of n.
inline double answer_query(const Dataset& data, const StatQuery& q,
                           const SqMechConfig& cfg, BudgetLedger& ledger,
                           RngState& rng) {
  if (cfg.ell == 0) {
    throw InvalidParameter("subsample size must be at least 1");
  }
  if (!cfg.with_replacement && cfg.ell > data.size()) {
    throw InvalidParameter(
        "subsample without replacement requires ell <= n");
  }
  ledger.charge();
  const Dataset sub = subsample(data, cfg.ell, cfg.with_replacement, rng);
  const double mean = empirical_mean(sub, q);
  double answer = mean;
  if (!cfg.noiseless) {
    answer += sample_laplace(LaplaceScale(noise_scale(cfg, data.size())), rng);
  }
  if (cfg.clip_output) answer = std::clamp(answer, 0.0, 1.0);
  return answer;
}

// One adaptive session: a dataset, a config, the composition ledger, and a
// transcript. Queries are processed strictly sequentially.
class SqSession {
 public:
  SqSession(const Dataset& data, SqMechConfig cfg, RngState& rng)
      : data_(data),
        cfg_(cfg),
        ledger_(PrivacyParams(cfg.eps, cfg.delta), cfg.k),
        rng_(rng) {}

  double answer(const StatQuery& q) {
    const auto start = std::chrono::steady_clock::now();
    double a;
    try {
      a = answer_query(data_, q, cfg_, ledger_, rng_);
    } catch (...) {
      transcript_.invalidated = true;
      throw;
    }
    const auto stop = std::chrono::steady_clock::now();
    transcript_.append(
        next_query_id_++, a, cfg_.ell,
        std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
            .count());
    return a;
  }

  double answer(const CountingQuery& q) {
    const StatQuery view = q.as_statistical();
    return answer(view);
  }

  const Dataset& data() const { return data_; }
  const SqMechConfig& config() const { return cfg_; }
  BudgetLedger& ledger() { return ledger_; }
  const BudgetLedger& ledger() const { return ledger_; }
  RngState& rng() { return rng_; }
  const Transcript& transcript() const { return transcript_; }
  Transcript& transcript() { return transcript_; }

 private:
  const Dataset& data_;
  SqMechConfig cfg_;
  BudgetLedger ledger_;
  RngState& rng_;
  Transcript transcript_;
  std::uint64_t next_query_id_ = 0;
};

}  // namespace adaquery
