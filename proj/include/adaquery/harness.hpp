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
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "adaquery/dataset.hpp"
#include "adaquery/error.hpp"
#include "adaquery/noise.hpp"
#include "adaquery/query.hpp"
#include "adaquery/rng.hpp"
#include "adaquery/scq.hpp"
#include "adaquery/sqmech.hpp"
#include "adaquery/transcript.hpp"

namespace adaquery {

// A fully specified distribution over a finite universe, so that q(D) is
// exactly computable. Mechanisms under test never see the weights; only
// the harness oracles do.
class KnownDistribution {
 public:
  explicit KnownDistribution(std::vector<double> weights)
      : weights_(std::move(weights)) {
    if (weights_.empty()) {
      throw InvalidParameter("distribution needs a nonempty universe");
    }
    double total = 0;
    cdf_.reserve(weights_.size());
    for (double w : weights_) {
      if (!(w >= 0)) throw InvalidParameter("weights must be nonnegative");
      total += w;
      cdf_.push_back(total);
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw InvalidParameter("weights must sum to 1 within 1e-12");
    }
    cdf_.back() = 1.0;
  }

  static KnownDistribution uniform(std::size_t universe_size) {
    return KnownDistribution(std::vector<double>(
        universe_size, 1.0 / static_cast<double>(universe_size)));
  }

  std::size_t universe_size() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }

  ElementId sample(RngState& rng) const {
    const double u = rng.uniform01();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return static_cast<ElementId>(
        std::min<std::size_t>(it - cdf_.begin(), weights_.size() - 1));
  }

  Dataset draw_sample(std::size_t n, RngState& rng) const {
    Dataset data;
    data.points.reserve(n);
    for (std::size_t i = 0; i < n; ++i) data.points.push_back(sample(rng));
    return data;
  }

 private:
  std::vector<double> weights_;
  std::vector<double> cdf_;
};

// Ground-truth oracle q(D) = sum_x w(x) q(x), brute force over the
// universe. Uses uncounted evaluation so oracle reads never show up in a
// mechanism's samples-examined accounting.
inline double exact_query_mean(const KnownDistribution& dist,
                               const StatQuery& q) {
  double sum = 0;
  for (std::size_t x = 0; x < dist.universe_size(); ++x) {
    sum += dist.weights()[x] * q.raw(static_cast<ElementId>(x));
  }
  return sum;
}

inline double exact_query_mean(const KnownDistribution& dist,
                               const CountingQuery& q) {
  double sum = 0;
  for (std::size_t x = 0; x < dist.universe_size(); ++x) {
    sum += dist.weights()[x] * q.raw(static_cast<ElementId>(x));
  }
  return sum;
}

// The baseline mechanism with no protection at all: the exact empirical
// answer, at the cost of a full pass over the sample.
inline double naive_empirical_answer(const Dataset& data, const StatQuery& q) {
  return empirical_mean(data, q);
}

inline double naive_empirical_answer(const Dataset& data,
                                     const CountingQuery& q) {
  return empirical_mean(data, q);
}

enum class AttackMechanism { kNaiveEmpirical, kAlg1, kScq };

struct AttackParams {
  double alpha = 0.2;
  double beta = 0.1;
};

struct AttackResult {
  double final_error = 0;   // |answer to the adaptive query - its q(D)|
  double max_error = 0;     // max over all k answers of |answer - q(D)|
  double phase2_truth = 0;  // q_k(D), for reference
  Transcript transcript;
};

// A two-phase overfitting attack. Phase 1 issues k-1 i.i.d. random counting
// queries (each element 1 with probability 1/2). Phase 2 issues one
// aggregate query voting 1 on an element iff the majority of phase-1
// answers moved in that element's direction; it is a deterministic function
// of the transcript, so the adaptivity is real. Answers in [0,1] are
// compared against exact distribution means.
inline AttackResult run_overfitting_attack(AttackMechanism mechanism,
                                           const AttackParams& params,
                                           const KnownDistribution& dist,
                                           const Dataset& data, std::size_t k,
                                           RngState& rng) {
  if (k < 2) {
    throw InvalidParameter("the attack needs k >= 2 queries");
  }
  const std::size_t m = dist.universe_size();
  const std::size_t n = data.size();

  // Per-mechanism answering closure over a shared session state.
  std::unique_ptr<SqSession> sq;
  ScqConfig scq_cfg;
  std::unique_ptr<BudgetLedger> scq_ledger;
  std::size_t scq_ell = 0;
  if (mechanism == AttackMechanism::kAlg1) {
    const SqMechConfig cfg = config_from_accuracy(
        params.alpha, params.beta, k, n, AccuracyMode::kHighProbability);
    sq = std::make_unique<SqSession>(data, cfg, rng);
  } else if (mechanism == AttackMechanism::kScq) {
    scq_cfg = scq_config(params.alpha, params.beta, k, n);
    scq_ell = static_cast<std::size_t>(std::ceil(
        2 * std::log(4 * static_cast<double>(k) / params.beta) /
        (params.alpha * params.alpha)));
    scq_ledger = std::make_unique<BudgetLedger>(
        PrivacyParams(scq_cfg.eps, scq_cfg.delta), k * scq_ell);
  }
  auto ask = [&](const CountingQuery& q) {
    switch (mechanism) {
      case AttackMechanism::kNaiveEmpirical:
        return naive_empirical_answer(data, q);
      case AttackMechanism::kAlg1:
        return sq->answer(q);
      case AttackMechanism::kScq:
      default:
        return counting_via_scq(data, q, scq_ell, scq_cfg, *scq_ledger, rng);
    }
  };

  AttackResult result;
  std::vector<int> votes(m, 0);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    std::vector<std::uint8_t> values(m);
    for (auto& v : values) v = rng.bernoulli(0.5) ? 1 : 0;
    const CountingQuery q = CountingQuery::from_table(std::move(values));
    const double answer = ask(q);
    const double truth = exact_query_mean(dist, q);
    result.max_error = std::max(result.max_error, std::abs(answer - truth));
    result.transcript.append(j, answer, 0, 0);
    const int direction = answer >= truth ? 1 : -1;
    for (std::size_t x = 0; x < m; ++x) {
      votes[x] += direction * (2 * q.raw(static_cast<ElementId>(x)) - 1);
    }
  }
  std::vector<std::uint8_t> aggregate(m);
  for (std::size_t x = 0; x < m; ++x) aggregate[x] = votes[x] > 0 ? 1 : 0;
  const CountingQuery final_query = CountingQuery::from_table(std::move(aggregate));
  const double final_answer = ask(final_query);
  result.phase2_truth = exact_query_mean(dist, final_query);
  result.final_error = std::abs(final_answer - result.phase2_truth);
  result.max_error = std::max(result.max_error, result.final_error);
  result.transcript.append(k - 1, final_answer, 0, 0);
  return result;
}

inline AttackResult run_overfitting_attack(AttackMechanism mechanism,
                                           const AttackParams& params,
                                           const KnownDistribution& dist,
                                           std::size_t n, std::size_t k,
                                           RngState& rng) {
  const Dataset data = dist.draw_sample(n, rng);
  return run_overfitting_attack(mechanism, params, dist, data, k, rng);
}

// A per-sample answering mechanism plus the adversary that drives it.
// The mechanism factory binds a session to a fresh sample; the adversary
// produces query i given all previous answers.
using BoundMechanism = std::function<double(const CountingQuery&)>;
using MechanismFactory =
    std::function<BoundMechanism(const Dataset&, RngState&)>;
using Adversary = std::function<CountingQuery(
    std::size_t round, const std::vector<double>& answers, RngState&)>;
using AdversaryFactory = std::function<Adversary(std::size_t universe_size)>;

// The random-query workload: each query is 1 on each element independently
// with probability 1/2, ignoring previous answers.
inline AdversaryFactory random_workload_adversary() {
  return [](std::size_t universe_size) {
    return [universe_size](std::size_t, const std::vector<double>&,
                           RngState& rng) {
      std::vector<std::uint8_t> values(universe_size);
      for (auto& v : values) v = rng.bernoulli(0.5) ? 1 : 0;
      return CountingQuery::from_table(std::move(values));
    };
  };
}

struct MonitorRecord {
  std::vector<double> utilities;  // |q_{t,i}(S_t) - q_{t,i}(D)|, kT entries
  std::size_t selected_index = 0;
  double selected_utility = 0;
  double max_utility = 0;
};

// Simulates the mechanism-adversary interaction over T fresh samples,
// scores every issued query by how far its sample mean sits from its
// distribution mean, and selects one (query, round) pair via the
// exponential mechanism with weight exp(eps * n * u / 2).
//
// This is a test oracle: it reads the distribution directly and must stay
// out of any privacy-facing code path.
inline MonitorRecord run_monitor(const MechanismFactory& mechanism_factory,
                                 const AdversaryFactory& adversary_factory,
                                 const KnownDistribution& dist, std::size_t n,
                                 std::size_t k, std::size_t T, double eps,
                                 RngState& rng) {
  if (T == 0 || k == 0) {
    throw InvalidParameter("monitor requires T >= 1 and k >= 1");
  }
  MonitorRecord record;
  for (std::size_t t = 0; t < T; ++t) {
    const Dataset sample = dist.draw_sample(n, rng);
    BoundMechanism mech = mechanism_factory(sample, rng);
    Adversary adversary = adversary_factory(dist.universe_size());
    std::vector<double> answers;
    for (std::size_t i = 0; i < k; ++i) {
      const CountingQuery q = adversary(i, answers, rng);
      answers.push_back(mech(q));
      double sample_mean = 0;
      for (ElementId x : sample.points) sample_mean += q.raw(x);
      sample_mean /= static_cast<double>(sample.size());
      record.utilities.push_back(
          std::abs(sample_mean - exact_query_mean(dist, q)));
    }
  }
  ScoredChoice choices;
  choices.eta = eps * static_cast<double>(n) / 2;
  for (std::size_t i = 0; i < record.utilities.size(); ++i) {
    choices.items.push_back({i, record.utilities[i]});
  }
  record.selected_index = exp_mechanism_select(choices, rng);
  record.selected_utility = record.utilities[record.selected_index];
  record.max_utility =
      *std::max_element(record.utilities.begin(), record.utilities.end());
  return record;
}

}  // namespace adaquery
