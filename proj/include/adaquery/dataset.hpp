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

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "adaquery/error.hpp"
#include "adaquery/rng.hpp"

namespace adaquery {

// Index of an element in a declared finite universe X.
using ElementId = std::uint32_t;

// An indexed sample of universe elements.
struct Dataset {
  std::vector<ElementId> points;

  std::size_t size() const { return points.size(); }
};

// Draws ell points uniformly from data. With replacement the draws are
// i.i.d.; without replacement the result is a uniform ell-subset, produced
// by a partial Fisher-Yates shuffle over an index override map (O(ell)
// time and space after the draw loop, the source data is untouched).
inline Dataset subsample(const Dataset& data, std::size_t ell,
                         bool with_replacement, RngState& rng) {
  const std::size_t n = data.size();
  if (ell == 0) {
    throw InvalidParameter("subsample size must be at least 1");
  }
  Dataset out;
  out.points.reserve(ell);
  if (with_replacement) {
    for (std::size_t i = 0; i < ell; ++i) {
      out.points.push_back(data.points[rng.uniform_below(n)]);
    }
    return out;
  }
  if (ell > n) {
    throw InvalidParameter(
        "subsample without replacement requires ell <= n");
  }
  std::unordered_map<std::size_t, std::size_t> moved;
  moved.reserve(2 * ell);
  for (std::size_t i = 0; i < ell; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    auto at = [&](std::size_t idx) {
      auto it = moved.find(idx);
      return it == moved.end() ? idx : it->second;
    };
    const std::size_t picked = at(j);
    moved[j] = at(i);
    out.points.push_back(data.points[picked]);
  }
  return out;
}

}  // namespace adaquery
