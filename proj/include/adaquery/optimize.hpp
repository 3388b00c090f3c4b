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
#include <limits>
#include <ostream>
#include <vector>

#include "adaquery/error.hpp"
#include "adaquery/query.hpp"
#include "adaquery/sqmech.hpp"

namespace adaquery {

using Vec = std::vector<double>;

// A loss whose gradient coordinates are bounded statistical queries.
//
// grad_point(x, p, i) returns coordinate i of the per-point gradient at p,
// affinely encoded into [0, 1]; [grad_lo, grad_hi] is the true gradient
// range that encoding maps from, so decode(encoded) recovers gradient
// units. loss_point is the per-point loss, encoded the same way into
// [loss_lo, loss_hi]; it is what boosted selection queries.
struct LossSpec {
  std::size_t d = 0;
  std::function<double(ElementId, const Vec&, std::size_t)> grad_point;
  double grad_lo = -1;
  double grad_hi = 1;
  double gradient_bound = 0;      // G with E[||grad||^2] <= G^2
  double diameter = 0;            // D, drives the convex schedule
  double strong_convexity = 0;    // H, drives the strongly convex schedule
  std::function<Vec(const Vec&)> project;
  std::function<double(ElementId, const Vec&)> loss_point;
  double loss_lo = 0;
  double loss_hi = 1;

  double decode_gradient(double encoded) const {
    return grad_lo + encoded * (grad_hi - grad_lo);
  }
  double decode_loss(double encoded) const {
    return loss_lo + encoded * (loss_hi - loss_lo);
  }
  // Laplace scale in decoded units is the encoded scale times this slope.
  double gradient_slope() const { return grad_hi - grad_lo; }
};

enum class GdMode { kConvex, kStronglyConvex };

struct GdConfig {
  std::size_t T = 0;     // iterations per optimization query
  double alpha = 0;      // target excess risk
  double beta = 0.1;     // failure probability driving the boosting count
  std::size_t k = 1;     // optimization queries per session
  GdMode mode = GdMode::kConvex;
  Vec x0;
};

// Step size at iteration t (1-based): D/(G sqrt(t)) for convex losses,
// 2/(H t) for H-strongly convex ones.
inline double step_size(const LossSpec& loss, GdMode mode, std::size_t t) {
  if (mode == GdMode::kConvex) {
    return loss.diameter /
           (loss.gradient_bound * std::sqrt(static_cast<double>(t)));
  }
  return 2.0 / (loss.strong_convexity * static_cast<double>(t));
}

// Oracle accuracy estimate for a session in in-expectation mode: the sum of
// the two constituent terms R^{1/4}/sqrt(n) + 1/sqrt(ell) (constants and
// log factors dropped).
inline double expectation_accuracy_estimate(const SqSession& session) {
  return session.config().expectation_term_sample +
         session.config().expectation_term_subsample;
}

// The strongly convex schedule's analysis needs the oracle accuracy to
// satisfy alpha' * sqrt(d) <= 1/T; true here means that constraint is
// violated at the configured scale.
inline bool strongly_convex_schedule_warning(const LossSpec& loss,
                                             const GdConfig& cfg,
                                             const SqSession& session) {
  return expectation_accuracy_estimate(session) *
             std::sqrt(static_cast<double>(loss.d)) >
         1.0 / static_cast<double>(cfg.T);
}

// One row of a gradient-descent trace.
struct GdTraceRow {
  std::size_t query_id;
  std::size_t iteration;
  std::size_t coordinate;
  double raw_answer;   // mechanism output, encoded units
  double decoded;      // gradient units
  double eta;
  double excess_loss_estimate;  // NaN when no estimator was supplied
};

inline void write_gd_trace_csv(const std::vector<GdTraceRow>& rows,
                               std::ostream& out) {
  out << "query_id,iteration,coordinate,raw_answer,decoded,eta,"
         "excess_loss_estimate\n";
  for (const GdTraceRow& r : rows) {
    out << r.query_id << ',' << r.iteration << ',' << r.coordinate << ','
        << format_double(r.raw_answer) << ',' << format_double(r.decoded)
        << ',' << format_double(r.eta) << ','
        << format_double(r.excess_loss_estimate) << '\n';
  }
}

// Estimates the gradient at x by issuing one statistical query per
// coordinate to the session's mechanism and decoding each answer back to
// gradient units. Consumes exactly d budgeted queries.
inline Vec noisy_gradient(const LossSpec& loss, const Vec& x,
                          SqSession& session) {
  Vec g(loss.d);
  for (std::size_t i = 0; i < loss.d; ++i) {
    const StatQuery q(
        [&loss, &x, i](ElementId p) { return loss.grad_point(p, x, i); });
    g[i] = loss.decode_gradient(session.answer(q));
  }
  return g;
}

// Projected gradient descent driven by the statistical-query oracle.
// Returns the average iterate (1/T) sum_t x_t. Budget exhaustion mid-run
// aborts (the session transcript is flagged invalid by the failing answer);
// a partial average carries no guarantee.
inline Vec gd_answer(
    const LossSpec& loss, const GdConfig& cfg, SqSession& session,
    std::vector<GdTraceRow>* trace = nullptr,
    const std::function<double(const Vec&)>& excess_estimator = nullptr,
    std::size_t trace_query_id = 0) {
  if (cfg.T == 0) {
    throw InvalidParameter("gradient descent requires T >= 1");
  }
  if (cfg.x0.size() != loss.d) {
    throw InvalidParameter("initial point dimension mismatch");
  }
  Vec x = cfg.x0;
  Vec sum(loss.d, 0.0);
  for (std::size_t t = 1; t <= cfg.T; ++t) {
    const Vec g = noisy_gradient(loss, x, session);
    const double eta = step_size(loss, cfg.mode, t);
    Vec stepped(loss.d);
    for (std::size_t i = 0; i < loss.d; ++i) stepped[i] = x[i] - eta * g[i];
    x = loss.project(stepped);
    for (std::size_t i = 0; i < loss.d; ++i) sum[i] += x[i];
    if (trace != nullptr) {
      const double excess =
          excess_estimator ? excess_estimator(x)
                           : std::numeric_limits<double>::quiet_NaN();
      for (std::size_t i = 0; i < loss.d; ++i) {
        const double decoded = g[i];
        trace->push_back({trace_query_id, t, i,
                          (decoded - loss.grad_lo) / loss.gradient_slope(),
                          decoded, eta, excess});
      }
    }
  }
  for (double& v : sum) v /= static_cast<double>(cfg.T);
  return sum;
}

// Boosted variant: run gradient descent r = ceil(ln(k/beta)) times and keep
// the candidate whose loss, estimated by one fresh statistical query per
// candidate, is smallest. eval_session defaults to the training session;
// passing a separate one keeps evaluation noise independent of the training
// budget.
inline Vec gd_answer_boosted(const LossSpec& loss, const GdConfig& cfg,
                             SqSession& session,
                             SqSession* eval_session = nullptr) {
  if (!loss.loss_point) {
    throw InvalidParameter("boosted selection requires loss_point");
  }
  const std::size_t r = static_cast<std::size_t>(std::max(
      1.0, std::ceil(std::log(static_cast<double>(cfg.k) / cfg.beta))));
  std::vector<Vec> candidates;
  candidates.reserve(r);
  for (std::size_t run = 0; run < r; ++run) {
    candidates.push_back(gd_answer(loss, cfg, session));
  }
  if (r == 1) return candidates.front();
  SqSession& evaluator = eval_session != nullptr ? *eval_session : session;
  std::size_t best = 0;
  double best_loss = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Vec& cand = candidates[c];
    const StatQuery q(
        [&loss, &cand](ElementId p) { return loss.loss_point(p, cand); });
    const double est = loss.decode_loss(evaluator.answer(q));
    if (c == 0 || est < best_loss) {
      best = c;
      best_loss = est;
    }
  }
  return candidates[best];
}

}  // namespace adaquery
