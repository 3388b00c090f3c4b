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

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <vector>

#include "adaquery/sqmech.hpp"

using namespace adaquery;

namespace {

Dataset iota_dataset(std::size_t n) {
  Dataset d;
  d.points.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.points[i] = ElementId(i);
  return d;
}

}  // namespace

TEST_CASE("config derivation: pinned high-probability parameters") {
  const SqMechConfig cfg = config_from_accuracy(
      0.2, 0.1, 50, 1000000, AccuracyMode::kHighProbability);
  CHECK(cfg.ell == 381);  // ceil(2 ln(2000) / 0.04) = ceil(380.06)
  CHECK(cfg.eps == Catch::Approx(0.003125).epsilon(1e-14));
  CHECK(cfg.delta == Catch::Approx(0.000625).epsilon(1e-14));
}

TEST_CASE("config derivation: constructed log-cancelling case") {
  // beta = 4k e^{-2} with k = 1 makes ln(4k/beta) = 2, so ell = 4.
  const double beta = 4 * std::exp(-2.0);
  const SqMechConfig cfg =
      config_from_accuracy(1.0, beta, 1, 100, AccuracyMode::kHighProbability);
  CHECK(cfg.ell == 4);
}

TEST_CASE("config derivation: in-expectation parameters") {
  const SqMechConfig cfg = config_from_accuracy(
      0.8, 0.1, 10, 10000, AccuracyMode::kInExpectation, 64);
  CHECK(cfg.eps == Catch::Approx(0.1).epsilon(1e-14));
  CHECK(cfg.delta == Catch::Approx(0.2).epsilon(1e-14));
  CHECK(cfg.ell == 64);
  CHECK(cfg.expectation_term_sample ==
        Catch::Approx(std::pow(10.0, 0.25) / 100).epsilon(1e-12));
  CHECK(cfg.expectation_term_subsample ==
        Catch::Approx(1.0 / 8).epsilon(1e-12));
  CHECK_THROWS_AS(
      config_from_accuracy(0.8, 0.1, 10, 10000, AccuracyMode::kInExpectation),
      InvalidParameter);
}

TEST_CASE("config derivation: sample-size guidance flag") {
  // Guidance threshold n >= 4 sqrt(2k ln(1/delta)) ln(2k/beta) / (alpha eps)
  // is astronomically above desk scale for these parameters.
  CHECK(config_from_accuracy(0.2, 0.1, 50, 20000,
                             AccuracyMode::kHighProbability)
            .below_sample_guidance);
}

TEST_CASE("per-query epsilon assignment: pinned value") {
  SqMechConfig cfg;
  cfg.eps = 0.0015625;  // alpha = 0.1
  cfg.delta = 0.01;
  cfg.k = 100;
  cfg.ell = 100;
  CHECK(per_query_epsilon_prime(cfg, 10000) ==
        Catch::Approx(0.00128712935348098).epsilon(1e-10));
}

TEST_CASE("subsample: ell = n without replacement is a permutation") {
  RngState rng(3);
  Dataset data = iota_dataset(20);
  Dataset sub = subsample(data, 20, false, rng);
  std::sort(sub.points.begin(), sub.points.end());
  CHECK(sub.points == data.points);
}

TEST_CASE("subsample: two-point uniformity") {
  RngState rng(4);
  Dataset data;
  data.points = {0, 1};
  const std::size_t draws = 100000;
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < draws; ++i) {
    zeros += subsample(data, 1, false, rng).points[0] == 0 ? 1 : 0;
  }
  const double se = std::sqrt(0.25 / draws);
  CHECK(std::abs(double(zeros) / draws - 0.5) <= 3 * se);
}

TEST_CASE("subsample: all 2-of-5 subsets equally likely") {
  RngState rng(5);
  Dataset data = iota_dataset(5);
  std::map<std::pair<ElementId, ElementId>, std::size_t> freq;
  const std::size_t draws = 100000;
  for (std::size_t i = 0; i < draws; ++i) {
    Dataset sub = subsample(data, 2, false, rng);
    auto a = std::min(sub.points[0], sub.points[1]);
    auto b = std::max(sub.points[0], sub.points[1]);
    CHECK(a != b);  // without replacement: points distinct
    ++freq[{a, b}];
  }
  CHECK(freq.size() == 10);
  const double se = std::sqrt(0.1 * 0.9 / draws);
  for (const auto& [pair, count] : freq) {
    CHECK(std::abs(double(count) / draws - 0.1) <= 3 * se);
  }
}

TEST_CASE("subsample input validation") {
  RngState rng(6);
  Dataset data = iota_dataset(5);
  CHECK_THROWS_AS(subsample(data, 0, true, rng), InvalidParameter);
  CHECK_THROWS_AS(subsample(data, 6, false, rng), InvalidParameter);
  CHECK(subsample(data, 6, true, rng).size() == 6);
}

TEST_CASE("answer_query: constant query recovers the constant on average") {
  RngState rng(7);
  Dataset data = iota_dataset(1000);
  SqMechConfig cfg;
  cfg.eps = 0.5;
  cfg.delta = 1e-4;
  cfg.k = 10000;
  cfg.ell = 10;
  const double b = noise_scale(cfg, data.size());
  const StatQuery q([](ElementId) { return 0.37; });
  const std::size_t trials = 10000;
  BudgetLedger ledger(PrivacyParams(cfg.eps, cfg.delta), trials);
  double sum = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    sum += answer_query(data, q, cfg, ledger, rng);
  }
  // Laplace(b) has variance 2 b^2.
  const double se = std::sqrt(2 * b * b / trials);
  CHECK(std::abs(sum / trials - 0.37) <= 3 * se);
  CHECK(q.eval_count() == trials * cfg.ell);
}

TEST_CASE("answer_query: laplace tail around the subsample mean") {
  // With a constant query the subsample mean is the constant, so the
  // deviation is pure Laplace noise: Pr[|dev| >= alpha/2] <= e^{-alpha eps' ell / 2}.
  RngState rng(8);
  Dataset data = iota_dataset(1000);
  SqMechConfig cfg;
  cfg.eps = 0.5;
  cfg.delta = 1e-4;
  cfg.k = 100;
  cfg.ell = 50;
  const double eps_prime = per_query_epsilon_prime(cfg, data.size());
  const double alpha = 0.5;
  const double bound = std::exp(-alpha * eps_prime * double(cfg.ell) / 2);
  const StatQuery q([](ElementId) { return 0.5; });
  const std::size_t trials = 20000;
  BudgetLedger ledger(PrivacyParams(cfg.eps, cfg.delta), trials);
  std::size_t exceed = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    exceed += std::abs(answer_query(data, q, cfg, ledger, rng) - 0.5) >=
                      alpha / 2
                  ? 1
                  : 0;
  }
  const double se = std::sqrt(bound * (1 - bound) / trials);
  CHECK(double(exceed) / trials <= bound + 3 * se);
}

TEST_CASE("answer_query: hoeffding envelope for the empirical phase") {
  RngState rng(9);
  // Half-ones dataset; noiseless mode isolates the subsampling deviation.
  Dataset data = iota_dataset(1000);
  SqMechConfig cfg;
  cfg.eps = 0.5;
  cfg.delta = 1e-4;
  cfg.k = 100;
  cfg.ell = 100;
  cfg.noiseless = true;
  const StatQuery q([](ElementId x) { return double(x & 1); });
  const double q_s = 0.5;
  const double alpha = 0.2;
  const double bound = 2 * std::exp(-alpha * alpha * double(cfg.ell) / 2);
  const std::size_t trials = 20000;
  BudgetLedger ledger(PrivacyParams(cfg.eps, cfg.delta), trials);
  std::size_t exceed = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    exceed += std::abs(answer_query(data, q, cfg, ledger, rng) - q_s) >=
                      alpha / 2
                  ? 1
                  : 0;
  }
  const double se = std::sqrt(bound * (1 - bound) / trials) + 1e-9;
  CHECK(double(exceed) / trials <= bound + 3 * se);
}

TEST_CASE("clip_output clamps into [0,1]; off leaves answers unbounded") {
  RngState rng(10);
  Dataset data = iota_dataset(100);
  SqMechConfig cfg;
  cfg.eps = 0.01;
  cfg.delta = 1e-4;
  cfg.k = 10;
  cfg.ell = 5;  // large noise scale: answers stray far outside [0,1]
  const StatQuery q([](ElementId) { return 0.5; });
  BudgetLedger ledger(PrivacyParams(cfg.eps, cfg.delta), 100000);
  bool saw_outside = false;
  for (int i = 0; i < 1000; ++i) {
    const double a = answer_query(data, q, cfg, ledger, rng);
    saw_outside = saw_outside || a < 0 || a > 1;
  }
  CHECK(saw_outside);
  cfg.clip_output = true;
  for (int i = 0; i < 1000; ++i) {
    const double a = answer_query(data, q, cfg, ledger, rng);
    CHECK(a >= 0);
    CHECK(a <= 1);
  }
}

TEST_CASE("session transcript records ell samples per query and serializes") {
  RngState rng(11);
  Dataset data = iota_dataset(500);
  SqMechConfig cfg = config_from_accuracy(0.5, 0.1, 3, data.size(),
                                          AccuracyMode::kHighProbability);
  SqSession session(data, cfg, rng);
  const StatQuery q([](ElementId x) { return double(x % 2); });
  session.answer(q);
  session.answer(q);
  CHECK(session.transcript().records.size() == 2);
  for (const TranscriptRecord& r : session.transcript().records) {
    CHECK(r.samples_examined == cfg.ell);
  }
  CHECK(q.eval_count() == 2 * cfg.ell);
  std::ostringstream out;
  write_csv(session.transcript(), out);
  CHECK(out.str().rfind("query_id,answer,samples_examined,elapsed_ns\n", 0) ==
        0);
}

TEST_CASE("session refuses query k+1 and flags the transcript") {
  RngState rng(12);
  Dataset data = iota_dataset(100);
  SqMechConfig cfg = config_from_accuracy(0.5, 0.1, 2, data.size(),
                                          AccuracyMode::kHighProbability);
  SqSession session(data, cfg, rng);
  const StatQuery q([](ElementId) { return 0.5; });
  session.answer(q);
  session.answer(q);
  CHECK_THROWS_AS(session.answer(q), BudgetExhausted);
  CHECK(session.transcript().invalidated);
  CHECK(session.transcript().records.size() == 2);
}
