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

#include <cassert>
#include <cmath>
#include <cstddef>

#include "adaquery/error.hpp"

namespace adaquery {

// An (epsilon, delta) differential-privacy target.
struct PrivacyParams {
  double epsilon;
  double delta;

  PrivacyParams(double eps, double del) : epsilon(eps), delta(del) {
    if (!(eps >= 0) || !std::isfinite(eps)) {
      throw InvalidParameter("epsilon must be a nonnegative real");
    }
    if (!(del >= 0) || !(del < 1)) {
      throw InvalidParameter("delta must lie in [0, 1)");
    }
  }
};

// Privacy of an eps-private mechanism run on a uniform ell-of-n subsample
// drawn without replacement: log(1 + (ell/n) * (e^eps - 1)).
//
// Evaluated with log1p/expm1; (ell/n) * (e^eps - 1) is tiny in the regime
// of interest and a naive log(1 + x) would lose most of its digits.
inline double amplify_without_replacement(double eps, std::size_t ell,
                                          std::size_t n) {
  if (ell == 0 || ell > n) {
    throw InvalidParameter("subsample size must satisfy 1 <= ell <= n");
  }
  if (!(eps >= 0) || !std::isfinite(eps)) {
    throw InvalidParameter("epsilon must be a nonnegative real");
  }
  const double ratio = static_cast<double>(ell) / static_cast<double>(n);
  const double result = std::log1p(ratio * std::expm1(eps));
  assert(!(eps <= 1) || result <= 2 * ratio * eps + 1e-15);
  return result;
}

// With-replacement variant: the sampling factor becomes the probability
// 1 - (1 - 1/n)^ell that a given point appears in the subsample.
inline double amplify_with_replacement(double eps, std::size_t ell,
                                       std::size_t n) {
  if (ell == 0 || n == 0) {
    throw InvalidParameter("subsample and sample sizes must be nonzero");
  }
  if (!(eps >= 0) || !std::isfinite(eps)) {
    throw InvalidParameter("epsilon must be a nonnegative real");
  }
  const double hit_prob =
      -std::expm1(static_cast<double>(ell) * std::log1p(-1.0 / static_cast<double>(n)));
  const double result = std::log1p(hit_prob * std::expm1(eps));
  assert(!(eps <= 1) ||
         result <= 2 * (static_cast<double>(ell) / static_cast<double>(n)) * eps + 1e-15);
  return result;
}

// Per-query budget under adaptive composition: eps / (2 sqrt(2k ln(1/delta))).
// Requires 0 < eps < 1 and delta > 0; the formula is undefined at delta = 0.
inline double compose_per_query_epsilon(const PrivacyParams& target,
                                        std::size_t k) {
  if (!(target.epsilon > 0) || !(target.epsilon < 1)) {
    throw InvalidParameter("composition requires 0 < epsilon < 1");
  }
  if (!(target.delta > 0)) {
    throw InvalidParameter("composition requires delta > 0");
  }
  if (k == 0) {
    throw InvalidParameter("composition requires k >= 1");
  }
  return target.epsilon /
         (2 * std::sqrt(2 * static_cast<double>(k) * std::log(1 / target.delta)));
}

// Tracks how many of the k budgeted queries a session has consumed.
// Charging is strictly sequential (one in-flight charge at a time); the
// owning mechanism serializes query processing.
//
// The per-query mechanisms here are pure-eps (delta' = 0), so the session
// delta equals the target delta alone.
class BudgetLedger {
 public:
  BudgetLedger(PrivacyParams target, std::size_t k)
      : target_(target),
        k_(k),
        per_query_epsilon_(compose_per_query_epsilon(target, k)) {}

  const PrivacyParams& target() const { return target_; }
  std::size_t query_budget() const { return k_; }
  double per_query_epsilon() const { return per_query_epsilon_; }
  std::size_t queries_used() const { return used_; }
  std::size_t remaining() const { return k_ - used_; }
  bool exhausted() const { return used_ >= k_; }

  void charge() {
    if (used_ >= k_) {
      throw BudgetExhausted("query budget exhausted: " + std::to_string(k_) +
                            " queries already answered");
    }
    ++used_;
  }

 private:
  PrivacyParams target_;
  std::size_t k_;
  double per_query_epsilon_;
  std::size_t used_ = 0;
};

}  // namespace adaquery
