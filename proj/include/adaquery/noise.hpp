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

#include <cmath>
#include <cstdint>
#include <vector>

#include "adaquery/error.hpp"
#include "adaquery/rng.hpp"

namespace adaquery {

// Scale parameter of a zero-mean Laplace distribution.
struct LaplaceScale {
  double b;

  explicit LaplaceScale(double scale) : b(scale) {
    if (!(scale > 0) || !std::isfinite(scale)) {
      throw InvalidParameter("Laplace scale must be positive and finite");
    }
  }
};

// Draws from Lap(b) by inverse-CDF transform of a single uniform.
inline double sample_laplace(LaplaceScale scale, RngState& rng) {
  const double v = rng.uniform_open01() - 0.5;  // in (-1/2, 1/2)
  return v < 0 ? scale.b * std::log1p(2 * v) : -scale.b * std::log1p(-2 * v);
}

struct ScoredItem {
  std::uint64_t id;
  double utility;
};

// A finite choice set for the exponential mechanism. eta is the exponent
// multiplier; callers running the monitor set it to eps * n / 2.
struct ScoredChoice {
  std::vector<ScoredItem> items;
  double eta;
};

// Selects one item with Pr[r] proportional to exp(eta * utility(r)).
// Utilities are shifted by their maximum before exponentiation; the shift
// cancels in the ratio and keeps exp() from overflowing at large eta.
inline std::uint64_t exp_mechanism_select(const ScoredChoice& choices,
                                          RngState& rng) {
  if (choices.items.empty()) {
    throw InvalidParameter("exponential mechanism: empty choice set");
  }
  if (!(choices.eta > 0) || !std::isfinite(choices.eta)) {
    throw InvalidParameter("exponential mechanism: eta must be positive");
  }
  double max_utility = choices.items.front().utility;
  for (const ScoredItem& item : choices.items) {
    if (!std::isfinite(item.utility)) {
      throw InvalidParameter("exponential mechanism: non-finite utility");
    }
    max_utility = std::max(max_utility, item.utility);
  }
  std::vector<double> weights;
  weights.reserve(choices.items.size());
  double total = 0;
  for (const ScoredItem& item : choices.items) {
    const double w = std::exp(choices.eta * (item.utility - max_utility));
    total += w;
    weights.push_back(w);
  }
  const double target = rng.uniform01() * total;
  double acc = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (target < acc) return choices.items[i].id;
  }
  return choices.items.back().id;  // rounding fell off the end
}

}  // namespace adaquery
