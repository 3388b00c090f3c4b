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
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "adaquery/dataset.hpp"
#include "adaquery/error.hpp"

namespace adaquery {

// A statistic q: X -> [0, 1], supplied as an opaque evaluation map. The
// mechanisms never inspect query structure; they only call operator(),
// which counts every point evaluation. eval_count is the machine-level
// record of how much data a mechanism actually examined.
class StatQuery {
 public:
  explicit StatQuery(std::function<double(ElementId)> fn)
      : fn_(std::move(fn)) {}

  static StatQuery from_table(std::vector<double> values) {
    for (double v : values) {
      if (!(v >= 0 && v <= 1)) {
        throw InvalidParameter("statistical query values must lie in [0, 1]");
      }
    }
    auto table = std::make_shared<std::vector<double>>(std::move(values));
    return StatQuery([table](ElementId x) { return (*table)[x]; });
  }

  // Counted evaluation: the path mechanisms must use.
  double operator()(ElementId x) const {
    ++eval_count_;
    return fn_(x);
  }

  // Uncounted evaluation, for ground-truth oracles only.
  double raw(ElementId x) const { return fn_(x); }

  std::uint64_t eval_count() const { return eval_count_; }

 private:
  std::function<double(ElementId)> fn_;
  mutable std::uint64_t eval_count_ = 0;
};

// A counting query q: X -> {0, 1}.
class CountingQuery {
 public:
  explicit CountingQuery(std::function<int(ElementId)> fn)
      : fn_(std::move(fn)) {}

  static CountingQuery from_table(std::vector<std::uint8_t> values) {
    for (std::uint8_t v : values) {
      if (v > 1) {
        throw InvalidParameter("counting query values must be 0 or 1");
      }
    }
    auto table = std::make_shared<std::vector<std::uint8_t>>(std::move(values));
    return CountingQuery([table](ElementId x) { return int((*table)[x]); });
  }

  int operator()(ElementId x) const {
    ++eval_count_;
    return fn_(x);
  }

  int raw(ElementId x) const { return fn_(x); }

  std::uint64_t eval_count() const { return eval_count_; }

  // Every counting query is a statistical query. Evaluation counts charged
  // through the view land on this query.
  StatQuery as_statistical() const {
    return StatQuery([this](ElementId x) { return double((*this)(x)); });
  }

 private:
  std::function<int(ElementId)> fn_;
  mutable std::uint64_t eval_count_ = 0;
};

// Empirical mean of q over the sample, evaluating (and counting) every point.
inline double empirical_mean(const Dataset& data, const StatQuery& q) {
  double sum = 0;
  for (ElementId x : data.points) sum += q(x);
  return sum / static_cast<double>(data.size());
}

inline double empirical_mean(const Dataset& data, const CountingQuery& q) {
  double sum = 0;
  for (ElementId x : data.points) sum += q(x);
  return sum / static_cast<double>(data.size());
}

}  // namespace adaquery
