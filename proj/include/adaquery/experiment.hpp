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
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "adaquery/error.hpp"
#include "adaquery/harness.hpp"
#include "adaquery/optimize.hpp"
#include "adaquery/privacy.hpp"
#include "adaquery/scq.hpp"
#include "adaquery/sqmech.hpp"

namespace adaquery {

using ordered_json = nlohmann::ordered_json;

// Flat "section.key" -> value view of a sectioned key-value config file.
// Lines are `key = value` under `[section]` headers; `#` and `;` start
// comments. Values keep internal whitespace but are trimmed at the ends.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap parse(std::istream& in) {
    ConfigMap cfg;
    std::string line;
    std::string section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const std::string t = trim(strip_comment(line));
      if (t.empty()) continue;
      if (t.front() == '[') {
        if (t.back() != ']' || t.size() < 3) {
          throw InvalidParameter("config line " + std::to_string(lineno) +
                                 ": malformed section header");
        }
        section = trim(t.substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) {
        throw InvalidParameter("config line " + std::to_string(lineno) +
                               ": expected key = value");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty()) {
        throw InvalidParameter("config line " + std::to_string(lineno) +
                               ": empty key");
      }
      cfg.values_[section.empty() ? key : section + "." + key] =
          trim(t.substr(eq + 1));
    }
    return cfg;
  }

  static ConfigMap parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidParameter("cannot open config file: " + path);
    return parse(in);
  }

  // Applies a `section.key=value` command-line override.
  void set_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw InvalidParameter("override must look like section.key=value: " +
                             assignment);
    }
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key,
                         const std::string& fallback = "") const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) {
      throw InvalidParameter("missing required config field: " + key);
    }
    return it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
  }

  double require_double(const std::string& key) const {
    return to_double(key, require_string(key));
  }

  std::size_t get_size(const std::string& key, std::size_t fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_size(key, it->second);
  }

  std::size_t require_size(const std::string& key) const {
    return to_size(key, require_string(key));
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw InvalidParameter("config field " + key + " must be true or false");
  }

  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    if (out.empty()) throw InvalidParameter("config field " + key + " is empty");
    return out;
  }

  std::vector<std::size_t> get_size_list(
      const std::string& key, std::vector<std::size_t> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::size_t> out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_size(key, trim(item)));
    if (out.empty()) throw InvalidParameter("config field " + key + " is empty");
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

  // Rejects any key outside the allowed set; diagnostics name the field.
  void check_known_fields(const std::set<std::string>& allowed) const {
    for (const auto& [key, value] : values_) {
      if (allowed.count(key) == 0) {
        throw InvalidParameter("unknown config field: " + key);
      }
    }
  }

 private:
  static std::string strip_comment(const std::string& s) {
    const auto pos = s.find_first_of("#;");
    return pos == std::string::npos ? s : s.substr(0, pos);
  }
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }
  static double to_double(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    } catch (const std::exception&) {
      throw InvalidParameter("config field " + key + " is not a number: " + v);
    }
  }
  static std::size_t to_size(const std::string& key, const std::string& v) {
    try {
      std::size_t used = 0;
      const long long n = std::stoll(v, &used);
      if (used != v.size() || n < 0) throw std::invalid_argument(v);
      return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
      throw InvalidParameter("config field " + key +
                             " is not a nonnegative integer: " + v);
    }
  }

  std::map<std::string, std::string> values_;
};

namespace detail {

inline void run_parallel(std::size_t count, std::size_t jobs,
                         const std::function<void(std::size_t)>& work) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const std::size_t workers = std::min(jobs, count);
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        work(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

inline double quantile(std::vector<double> sorted, double p) {
  if (sorted.empty()) return 0;
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1 - frac) + sorted[hi] * frac;
}

inline double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0;
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline ordered_json stats_of(std::vector<double> v) {
  ordered_json j;
  j["count"] = v.size();
  j["mean"] = mean_of(v);
  std::sort(v.begin(), v.end());
  j["p10"] = quantile(v, 0.10);
  j["p50"] = quantile(v, 0.50);
  j["p90"] = quantile(v, 0.90);
  j["max"] = v.empty() ? 0.0 : v.back();
  return j;
}

// The benchmark query burns a fixed amount of arithmetic per point so that
// timing reflects evaluation cost rather than memory traffic alone.
inline double bench_query_value(ElementId id) {
  std::uint64_t h = static_cast<std::uint64_t>(id) + 0x9e3779b97f4a7c15ULL;
  for (int r = 0; r < 8; ++r) {
    h ^= h >> 30;
    h *= 0xbf58476d1ce4e5b9ULL;
    h ^= h >> 27;
    h *= 0x94d049bb133111ebULL;
  }
  return static_cast<double>(h & 1023) / 1023.0;
}

// Quadratic loss over feature vectors in [0,1]^d: per-point loss
// (1/2)||x - f_p||^2, encoded by dividing by d/2; gradient coordinate
// x_i - f_{p,i} in [-1, 1]. 1-strongly convex, G = D = sqrt(d).
struct QuadraticProblem {
  std::vector<Vec> features;
  LossSpec loss;
  Vec minimizer;  // mean feature vector, assumed interior to [0,1]^d

  double excess_loss(const Vec& x) const {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - minimizer[i];
      s += d * d;
    }
    return 0.5 * s;
  }
};

inline QuadraticProblem make_quadratic_problem(std::size_t n, std::size_t d,
                                               const Vec& center,
                                               double spread, RngState& rng) {
  QuadraticProblem prob;
  prob.features.resize(n, Vec(d));
  prob.minimizer.assign(d, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      // Gaussian via Box-Muller on the shared stream, clipped into [0, 1].
      const double u1 = rng.uniform_open01();
      const double u2 = rng.uniform01();
      const double z =
          std::sqrt(-2 * std::log(u1)) * std::cos(6.283185307179586 * u2);
      prob.features[p][i] = std::clamp(center[i] + spread * z, 0.0, 1.0);
      prob.minimizer[i] += prob.features[p][i];
    }
  }
  for (double& m : prob.minimizer) m /= static_cast<double>(n);

  const double dd = static_cast<double>(d);
  auto* features = &prob.features;
  prob.loss.d = d;
  prob.loss.grad_lo = -1;
  prob.loss.grad_hi = 1;
  prob.loss.gradient_bound = std::sqrt(dd);
  prob.loss.diameter = std::sqrt(dd);
  prob.loss.strong_convexity = 1.0;
  prob.loss.loss_lo = 0;
  prob.loss.loss_hi = dd / 2;
  prob.loss.grad_point = [features](ElementId p, const Vec& x, std::size_t i) {
    const double g = x[i] - (*features)[p][i];
    return (g + 1) / 2;  // encode [-1,1] -> [0,1]
  };
  prob.loss.loss_point = [features, dd](ElementId p, const Vec& x) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - (*features)[p][i];
      s += diff * diff;
    }
    return (0.5 * s) / (dd / 2);  // encode [0, d/2] -> [0,1]
  };
  prob.loss.project = [](const Vec& x) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::clamp(x[i], 0.0, 1.0);
    return y;
  };
  return prob;
}

}  // namespace detail

struct ExperimentOutcome {
  bool pass = true;
  std::string csv_path;
  std::string summary_path;
  ordered_json summary;
};

// Shared fields every experiment accepts.
inline std::set<std::string> common_fields() {
  return {"experiment.kind",   "experiment.trials", "experiment.seed",
          "experiment.output", "experiment.summary"};
}

inline std::set<std::string> allowed_fields_for(const std::string& kind) {
  std::set<std::string> a = common_fields();
  auto add = [&a](std::initializer_list<const char*> keys) {
    for (const char* k : keys) a.insert(k);
  };
  if (kind == "sq-accuracy" || kind == "counting-via-scq") {
    add({"mech.alpha", "mech.beta", "mech.k", "mech.n", "mech.universe",
         "assert.max_failure_rate"});
  } else if (kind == "scq-accuracy") {
    add({"mech.n", "mech.calls", "scq.flip_probs", "mech.datasets",
         "assert.min_within_rate"});
  } else if (kind == "attack") {
    add({"mech.alpha", "mech.beta", "mech.k", "mech.n", "mech.universe",
         "attack.mechanism", "assert.naive_error_threshold",
         "assert.min_threshold_rate", "assert.min_separation_rate"});
  } else if (kind == "gd-convex" || kind == "gd-strongly-convex") {
    add({"gd.d", "gd.n", "gd.T", "gd.ell", "gd.alpha", "gd.beta",
         "gd.oracle_alpha", "gd.center", "gd.spread", "gd.x0", "gd.boosted",
         "gd.eval_ell", "assert.max_mean_excess"});
  } else if (kind == "bench-timing") {
    add({"bench.n_values", "bench.ell", "bench.queries", "bench.alpha",
         "bench.beta", "assert.max_alg1_growth", "assert.min_naive_growth"});
  } else if (kind == "amplification-table") {
    add({"amp.eps_values", "amp.ratios", "amp.n"});
  } else {
    throw InvalidParameter("unknown experiment kind: " + kind);
  }
  return a;
}

inline void validate_config(const ConfigMap& cfg) {
  const std::string kind = cfg.require_string("experiment.kind");
  cfg.check_known_fields(allowed_fields_for(kind));
  cfg.require_string("experiment.output");
  if (cfg.get_size("experiment.trials", 1) == 0) {
    throw InvalidParameter("experiment.trials must be at least 1");
  }
}

namespace detail {

struct CsvDoc {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline void write_csv_doc(const ConfigMap& cfg, std::uint64_t seed,
                          const CsvDoc& doc, std::ostream& out) {
  for (const auto& [key, value] : cfg.entries()) {
    out << "# " << key << " = " << value << "\n";
  }
  out << "# resolved.seed = " << seed << "\n";
  for (std::size_t i = 0; i < doc.header.size(); ++i) {
    out << (i ? "," : "") << doc.header[i];
  }
  out << "\n";
  for (const auto& row : doc.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << row[i];
    }
    out << "\n";
  }
}

inline std::string cell(double v) { return format_double(v); }
inline std::string cell(std::size_t v) { return std::to_string(v); }

}  // namespace detail

// Runs the configured experiment: one CSV row per trial (or per grid cell),
// a JSON summary with pass/fail per configured assertion, and a boolean
// outcome that is true iff every configured assertion held.
inline ExperimentOutcome run_experiment(const ConfigMap& cfg,
                                        std::uint64_t seed_override = 0,
                                        bool has_seed_override = false,
                                        std::size_t jobs = 1) {
  validate_config(cfg);
  const std::string kind = cfg.require_string("experiment.kind");
  const std::size_t trials = cfg.get_size("experiment.trials", 100);
  const std::uint64_t seed = has_seed_override
                                 ? seed_override
                                 : cfg.get_size("experiment.seed", 1);
  RngState root(seed);

  detail::CsvDoc doc;
  ordered_json summary;
  summary["schema_version"] = 1;
  summary["kind"] = kind;
  summary["seed"] = seed;
  summary["trials"] = trials;
  ordered_json assertions = ordered_json::object();
  bool pass = true;
  auto check = [&](const std::string& name, bool ok, double observed,
                   double threshold) {
    ordered_json a;
    a["observed"] = observed;
    a["threshold"] = threshold;
    a["pass"] = ok;
    assertions[name] = a;
    pass = pass && ok;
  };

  if (kind == "sq-accuracy" || kind == "counting-via-scq") {
    const double alpha = cfg.get_double("mech.alpha", 0.2);
    const double beta = cfg.get_double("mech.beta", 0.1);
    const std::size_t k = cfg.get_size("mech.k", 50);
    const std::size_t n = cfg.get_size("mech.n", 20000);
    const std::size_t universe = cfg.get_size("mech.universe", 512);
    const KnownDistribution dist = KnownDistribution::uniform(universe);
    const AttackMechanism mech = kind == "sq-accuracy" ? AttackMechanism::kAlg1
                                                       : AttackMechanism::kScq;
    doc.header = {"trial", "max_error", "final_error", "failed"};
    doc.rows.resize(trials);
    std::vector<double> max_errors(trials);
    detail::run_parallel(trials, jobs, [&](std::size_t t) {
      RngState rng = root.derive(t);
      const AttackResult r = run_overfitting_attack(
          mech, AttackParams{alpha, beta}, dist, n, k, rng);
      max_errors[t] = r.max_error;
      doc.rows[t] = {detail::cell(t), detail::cell(r.max_error),
                     detail::cell(r.final_error),
                     r.max_error > alpha ? "1" : "0"};
    });
    std::size_t failures = 0;
    for (double e : max_errors) failures += e > alpha ? 1 : 0;
    const double failure_rate =
        static_cast<double>(failures) / static_cast<double>(trials);
    summary["max_error"] = detail::stats_of(max_errors);
    summary["failure_rate"] = failure_rate;
    if (cfg.has("assert.max_failure_rate")) {
      const double limit = cfg.require_double("assert.max_failure_rate");
      check("failure_rate", failure_rate <= limit, failure_rate, limit);
    }
  } else if (kind == "scq-accuracy") {
    const std::size_t n = cfg.get_size("mech.n", 100);
    const std::size_t calls = cfg.get_size("mech.calls", 100000);
    const std::size_t datasets = cfg.get_size("mech.datasets", 20);
    const std::vector<double> flips =
        cfg.get_double_list("scq.flip_probs", {0.05, 0.1, 0.25});
    doc.header = {"dataset", "flip_prob", "ones", "empirical", "expected",
                  "stderr_units"};
    const std::size_t cells = datasets * flips.size();
    doc.rows.resize(cells);
    std::vector<double> stderr_units(cells);
    detail::run_parallel(cells, jobs, [&](std::size_t c) {
      const std::size_t ds = c / flips.size();
      const double flip = flips[c % flips.size()];
      RngState rng = root.derive(c);
      Dataset data;
      std::size_t ones = 0;
      for (std::size_t p = 0; p < n; ++p) {
        const bool one = rng.bernoulli(0.5);
        ones += one ? 1 : 0;
        data.points.push_back(one ? 1 : 0);
      }
      const CountingQuery q(
          [](ElementId x) { return static_cast<int>(x & 1); });
      BudgetLedger ledger(PrivacyParams(0.5, 1e-6), calls);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < calls; ++i) {
        hits += static_cast<std::size_t>(answer_scq(data, q, flip, ledger, rng));
      }
      const double empirical =
          static_cast<double>(hits) / static_cast<double>(calls);
      const double i_over_n =
          static_cast<double>(ones) / static_cast<double>(n);
      // E[answer] = (1 - flip) i/n + flip (n-i)/n with flip = alpha/2.
      const double expected = (1 - flip) * i_over_n + flip * (1 - i_over_n);
      const double se = std::sqrt(expected * (1 - expected) /
                                  static_cast<double>(calls));
      stderr_units[c] = std::abs(empirical - expected) / se;
      doc.rows[c] = {detail::cell(ds),        detail::cell(flip),
                     detail::cell(ones),      detail::cell(empirical),
                     detail::cell(expected),  detail::cell(stderr_units[c])};
    });
    std::size_t within = 0;
    for (double u : stderr_units) within += u <= 3.0 ? 1 : 0;
    const double within_rate =
        static_cast<double>(within) / static_cast<double>(cells);
    summary["stderr_units"] = detail::stats_of(stderr_units);
    summary["within_3se_rate"] = within_rate;
    if (cfg.has("assert.min_within_rate")) {
      const double limit = cfg.require_double("assert.min_within_rate");
      check("within_3se_rate", within_rate >= limit, within_rate, limit);
    }
  } else if (kind == "attack") {
    const double alpha = cfg.get_double("mech.alpha", 0.2);
    const double beta = cfg.get_double("mech.beta", 0.1);
    const std::size_t k = cfg.get_size("mech.k", 50);
    const std::size_t n = cfg.get_size("mech.n", 20000);
    const std::size_t universe = cfg.get_size("mech.universe", 512);
    const std::string mech_name =
        cfg.get_string("attack.mechanism", "paired");
    const KnownDistribution dist = KnownDistribution::uniform(universe);
    const bool paired = mech_name == "paired";
    AttackMechanism single = AttackMechanism::kNaiveEmpirical;
    if (!paired) {
      if (mech_name == "naive-empirical") {
        single = AttackMechanism::kNaiveEmpirical;
      } else if (mech_name == "alg1") {
        single = AttackMechanism::kAlg1;
      } else if (mech_name == "scq") {
        single = AttackMechanism::kScq;
      } else {
        throw InvalidParameter("attack.mechanism must be one of "
                               "naive-empirical, alg1, scq, paired");
      }
    }
    doc.rows.resize(trials);
    std::vector<double> naive_err(trials), alg1_err(trials);
    if (paired) {
      doc.header = {"trial", "naive_final_error", "alg1_final_error",
                    "naive_wins"};
    } else {
      doc.header = {"trial", "final_error", "max_error"};
    }
    detail::run_parallel(trials, jobs, [&](std::size_t t) {
      RngState rng = root.derive(t);
      if (paired) {
        const Dataset data = dist.draw_sample(n, rng);
        RngState rng_naive = rng.derive(1);
        RngState rng_alg1 = rng.derive(2);
        const AttackResult rn = run_overfitting_attack(
            AttackMechanism::kNaiveEmpirical, AttackParams{alpha, beta}, dist,
            data, k, rng_naive);
        const AttackResult ra =
            run_overfitting_attack(AttackMechanism::kAlg1,
                                   AttackParams{alpha, beta}, dist, data, k,
                                   rng_alg1);
        naive_err[t] = rn.final_error;
        alg1_err[t] = ra.final_error;
        doc.rows[t] = {detail::cell(t), detail::cell(rn.final_error),
                       detail::cell(ra.final_error),
                       rn.final_error > ra.final_error ? "1" : "0"};
      } else {
        const AttackResult r = run_overfitting_attack(
            single, AttackParams{alpha, beta}, dist, n, k, rng);
        naive_err[t] = r.final_error;
        doc.rows[t] = {detail::cell(t), detail::cell(r.final_error),
                       detail::cell(r.max_error)};
      }
    });
    if (paired) {
      std::size_t wins = 0;
      for (std::size_t t = 0; t < trials; ++t) {
        wins += naive_err[t] > alg1_err[t] ? 1 : 0;
      }
      const double sep_rate =
          static_cast<double>(wins) / static_cast<double>(trials);
      summary["naive_final_error"] = detail::stats_of(naive_err);
      summary["alg1_final_error"] = detail::stats_of(alg1_err);
      summary["separation_rate"] = sep_rate;
      if (cfg.has("assert.min_separation_rate")) {
        const double limit = cfg.require_double("assert.min_separation_rate");
        check("separation_rate", sep_rate >= limit, sep_rate, limit);
      }
      if (cfg.has("assert.naive_error_threshold")) {
        const double thr = cfg.require_double("assert.naive_error_threshold");
        std::size_t over = 0;
        for (double e : naive_err) over += e > thr ? 1 : 0;
        const double rate =
            static_cast<double>(over) / static_cast<double>(trials);
        const double min_rate =
            cfg.get_double("assert.min_threshold_rate", 0.9);
        summary["naive_over_threshold_rate"] = rate;
        check("naive_over_threshold_rate", rate >= min_rate, rate, min_rate);
      }
    } else {
      summary["final_error"] = detail::stats_of(naive_err);
      if (cfg.has("assert.naive_error_threshold")) {
        const double thr = cfg.require_double("assert.naive_error_threshold");
        std::size_t over = 0;
        for (double e : naive_err) over += e > thr ? 1 : 0;
        const double rate =
            static_cast<double>(over) / static_cast<double>(trials);
        const double min_rate =
            cfg.get_double("assert.min_threshold_rate", 0.9);
        summary["over_threshold_rate"] = rate;
        check("over_threshold_rate", rate >= min_rate, rate, min_rate);
      }
    }
  } else if (kind == "gd-convex" || kind == "gd-strongly-convex") {
    const std::size_t d = cfg.get_size("gd.d", 2);
    const std::size_t n = cfg.get_size("gd.n", 20000);
    const double alpha = cfg.get_double("gd.alpha", 0.1);
    const double gd_beta = cfg.get_double("gd.beta", 0.1);
    const double oracle_alpha = cfg.get_double("gd.oracle_alpha", 0.5);
    const std::size_t ell = cfg.get_size("gd.ell", 50);
    const double spread = cfg.get_double("gd.spread", 0.12);
    const bool boosted = cfg.get_bool("gd.boosted", false);
    const GdMode mode = kind == "gd-convex" ? GdMode::kConvex
                                            : GdMode::kStronglyConvex;
    Vec center = cfg.get_double_list("gd.center", Vec(d, 0.5));
    Vec x0 = cfg.get_double_list("gd.x0", Vec(d, 0.95));
    if (center.size() != d || x0.size() != d) {
      throw InvalidParameter("gd.center and gd.x0 must have gd.d entries");
    }
    std::size_t T = cfg.get_size("gd.T", 0);
    if (T == 0) {
      // Default convex schedule length: ceil(diam^2 G^2 / alpha^2) = ceil(d^2/alpha^2).
      T = static_cast<std::size_t>(
          std::ceil(static_cast<double>(d * d) / (alpha * alpha)));
    }
    doc.header = {"trial", "excess_loss", "oracle_calls", "failed"};
    doc.rows.resize(trials);
    std::vector<double> excess(trials);
    detail::run_parallel(trials, jobs, [&](std::size_t t) {
      RngState rng = root.derive(t);
      detail::QuadraticProblem prob =
          detail::make_quadratic_problem(n, d, center, spread, rng);
      Dataset data;
      data.points.resize(n);
      for (std::size_t p = 0; p < n; ++p) {
        data.points[p] = static_cast<ElementId>(p);
      }
      const std::size_t runs =
          boosted ? static_cast<std::size_t>(std::max(
                        1.0, std::ceil(std::log(1.0 / gd_beta))))
                  : 1;
      const std::size_t budget = runs * T * d + (boosted ? runs : 0);
      SqMechConfig mech = config_from_accuracy(
          oracle_alpha, gd_beta, budget, n, AccuracyMode::kInExpectation, ell);
      SqSession session(data, mech, rng);
      GdConfig gcfg;
      gcfg.T = T;
      gcfg.alpha = alpha;
      gcfg.beta = gd_beta;
      gcfg.k = 1;
      gcfg.mode = mode;
      gcfg.x0 = x0;
      Vec result;
      if (boosted) {
        const std::size_t eval_ell = cfg.get_size("gd.eval_ell", 200);
        SqMechConfig eval_mech =
            config_from_accuracy(1.0, gd_beta, runs, n,
                                 AccuracyMode::kInExpectation, eval_ell);
        SqSession eval_session(data, eval_mech, rng);
        result = gd_answer_boosted(prob.loss, gcfg, session, &eval_session);
      } else {
        result = gd_answer(prob.loss, gcfg, session);
      }
      excess[t] = prob.excess_loss(result);
      doc.rows[t] = {detail::cell(t), detail::cell(excess[t]),
                     detail::cell(session.transcript().records.size() *
                                  session.config().ell),
                     excess[t] > alpha ? "1" : "0"};
    });
    std::size_t failures = 0;
    for (double e : excess) failures += e > alpha ? 1 : 0;
    summary["excess_loss"] = detail::stats_of(excess);
    summary["failure_rate"] =
        static_cast<double>(failures) / static_cast<double>(trials);
    summary["T"] = T;
    if (cfg.has("assert.max_mean_excess")) {
      const double limit = cfg.require_double("assert.max_mean_excess");
      const double m = detail::mean_of(excess);
      check("mean_excess_loss", m <= limit, m, limit);
    }
  } else if (kind == "bench-timing") {
    const std::vector<std::size_t> n_values =
        cfg.get_size_list("bench.n_values", {10000, 100000, 1000000});
    const std::size_t ell = cfg.get_size("bench.ell", 381);
    const std::size_t queries = cfg.get_size("bench.queries", 50);
    const double alpha = cfg.get_double("bench.alpha", 0.2);
    const double beta = cfg.get_double("bench.beta", 0.1);
    doc.header = {"n", "mechanism", "query", "samples_examined", "elapsed_ns"};
    const StatQuery q([](ElementId x) { return detail::bench_query_value(x); });
    std::map<std::size_t, double> alg1_ns, naive_ns;
    for (const std::size_t n : n_values) {
      RngState rng = root.derive(n);
      Dataset data;
      data.points.resize(n);
      for (std::size_t p = 0; p < n; ++p) {
        data.points[p] = static_cast<ElementId>(rng.next_u64() & 0xffffffffULL);
      }
      SqMechConfig mech = config_from_accuracy(
          alpha, beta, queries, n, AccuracyMode::kHighProbability);
      mech.ell = ell;
      SqSession session(data, mech, rng);
      double alg1_total = 0, naive_total = 0;
      for (std::size_t i = 0; i < queries; ++i) {
        session.answer(q);
        const TranscriptRecord& r = session.transcript().records.back();
        alg1_total += static_cast<double>(r.elapsed_ns);
        doc.rows.push_back({detail::cell(n), "alg1", detail::cell(i),
                            detail::cell(r.samples_examined),
                            detail::cell(r.elapsed_ns)});
      }
      for (std::size_t i = 0; i < queries; ++i) {
        const auto start = std::chrono::steady_clock::now();
        const double a = naive_empirical_answer(data, q);
        const auto stop = std::chrono::steady_clock::now();
        (void)a;
        const std::uint64_t ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start)
                .count();
        naive_total += static_cast<double>(ns);
        doc.rows.push_back({detail::cell(n), "naive", detail::cell(i),
                            detail::cell(static_cast<std::size_t>(n)),
                            detail::cell(static_cast<std::size_t>(ns))});
      }
      alg1_ns[n] = alg1_total / static_cast<double>(queries);
      naive_ns[n] = naive_total / static_cast<double>(queries);
    }
    const std::size_t n_lo = n_values.front();
    const std::size_t n_hi = n_values.back();
    const double alg1_growth = alg1_ns[n_hi] / alg1_ns[n_lo];
    const double naive_growth = naive_ns[n_hi] / naive_ns[n_lo];
    ordered_json alg1_j = ordered_json::object();
    ordered_json naive_j = ordered_json::object();
    for (const std::size_t n : n_values) {
      alg1_j[std::to_string(n)] = alg1_ns[n];
      naive_j[std::to_string(n)] = naive_ns[n];
    }
    summary["alg1_mean_ns"] = alg1_j;
    summary["naive_mean_ns"] = naive_j;
    summary["alg1_growth"] = alg1_growth;
    summary["naive_growth"] = naive_growth;
    if (cfg.has("assert.max_alg1_growth")) {
      const double limit = cfg.require_double("assert.max_alg1_growth");
      check("alg1_growth", alg1_growth <= limit, alg1_growth, limit);
    }
    if (cfg.has("assert.min_naive_growth")) {
      const double limit = cfg.require_double("assert.min_naive_growth");
      check("naive_growth", naive_growth >= limit, naive_growth, limit);
    }
  } else if (kind == "amplification-table") {
    const std::vector<double> eps_values =
        cfg.get_double_list("amp.eps_values", {0.1, 0.5, 1.0});
    const std::vector<double> ratios =
        cfg.get_double_list("amp.ratios", {0.001, 0.01, 0.1});
    const std::size_t n = cfg.get_size("amp.n", 1000000);
    doc.header = {"eps", "ratio", "ell", "without_replacement",
                  "with_replacement", "linear_bound"};
    for (const double eps : eps_values) {
      for (const double ratio : ratios) {
        const std::size_t ell = static_cast<std::size_t>(
            std::llround(ratio * static_cast<double>(n)));
        const double wo = amplify_without_replacement(eps, ell, n);
        const double wr = amplify_with_replacement(eps, ell, n);
        const double bound = 2 * ratio * eps;
        doc.rows.push_back({detail::cell(eps), detail::cell(ratio),
                            detail::cell(ell), detail::cell(wo),
                            detail::cell(wr), detail::cell(bound)});
      }
    }
    summary["rows"] = doc.rows.size();
  }

  summary["assertions"] = assertions;
  summary["pass"] = pass;

  ExperimentOutcome outcome;
  outcome.pass = pass;
  outcome.summary = summary;
  outcome.csv_path = cfg.require_string("experiment.output");
  {
    std::ofstream out(outcome.csv_path, std::ios::binary);
    if (!out) {
      throw InvalidParameter("cannot write output file: " + outcome.csv_path);
    }
    detail::write_csv_doc(cfg, seed, doc, out);
  }
  outcome.summary_path = cfg.get_string("experiment.summary", "");
  if (!outcome.summary_path.empty()) {
    std::ofstream out(outcome.summary_path, std::ios::binary);
    if (!out) {
      throw InvalidParameter("cannot write summary file: " +
                             outcome.summary_path);
    }
    out << summary.dump(2) << "\n";
  }
  return outcome;
}

}  // namespace adaquery
