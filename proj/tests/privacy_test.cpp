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

#include <cmath>

#include "adaquery/privacy.hpp"

using namespace adaquery;

TEST_CASE("amplification without replacement: identity when ell = n") {
  CHECK(amplify_without_replacement(0.5, 100, 100) ==
        Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("amplification without replacement: pinned value") {
  // log(1 + 0.01 * (e - 1))
  CHECK(amplify_without_replacement(1.0, 10, 1000) ==
        Catch::Approx(0.0170368632361765).epsilon(1e-10));
}

TEST_CASE("amplification without replacement: linear bound at eps <= 1") {
  CHECK(amplify_without_replacement(1.0, 10, 1000) <= 2 * (10.0 / 1000) * 1.0);
  for (double eps : {0.05, 0.3, 0.7, 1.0}) {
    for (std::size_t ell : {std::size_t(1), std::size_t(50), std::size_t(500)}) {
      CHECK(amplify_without_replacement(eps, ell, 1000) <=
            2 * (double(ell) / 1000) * eps);
    }
  }
}

TEST_CASE("amplification with replacement: n = 1 collapses to eps") {
  CHECK(amplify_with_replacement(0.5, 3, 1) ==
        Catch::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("amplification with replacement: pinned value") {
  // log(1 + (1 - 0.999^10) * (e - 1))
  CHECK(amplify_with_replacement(1.0, 10, 1000) ==
        Catch::Approx(0.0169610462140018).epsilon(1e-10));
}

TEST_CASE("amplification with replacement: linear bound at eps <= 1") {
  for (double eps : {0.05, 0.3, 0.7, 1.0}) {
    for (std::size_t ell : {std::size_t(1), std::size_t(50), std::size_t(500)}) {
      CHECK(amplify_with_replacement(eps, ell, 1000) <=
            2 * (double(ell) / 1000) * eps);
    }
  }
}

TEST_CASE("amplification results never exceed eps; strict below at ell < n") {
  for (double eps : {0.1, 1.0, 3.0}) {
    CHECK(amplify_without_replacement(eps, 10, 1000) < eps);
    CHECK(amplify_with_replacement(eps, 10, 1000) <= eps);
    CHECK(amplify_without_replacement(eps, 1000, 1000) ==
          Catch::Approx(eps).epsilon(1e-12));
  }
}

TEST_CASE("amplification monotone in ell and eps") {
  double prev = 0;
  for (std::size_t ell = 1; ell <= 100; ell += 9) {
    const double v = amplify_without_replacement(0.5, ell, 100);
    CHECK(v >= prev);
    prev = v;
  }
  prev = 0;
  for (double eps = 0.1; eps <= 2.01; eps += 0.1) {
    const double v = amplify_with_replacement(eps, 10, 100);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("amplification input validation") {
  CHECK_THROWS_AS(amplify_without_replacement(0.5, 0, 10), InvalidParameter);
  CHECK_THROWS_AS(amplify_without_replacement(0.5, 11, 10), InvalidParameter);
  CHECK_THROWS_AS(amplify_with_replacement(0.5, 0, 10), InvalidParameter);
  CHECK_THROWS_AS(amplify_with_replacement(0.5, 1, 0), InvalidParameter);
}

TEST_CASE("composition: pinned value") {
  CHECK(compose_per_query_epsilon(PrivacyParams(0.1, 1e-5), 100) ==
        Catch::Approx(0.00104198666246653).epsilon(1e-10));
}

TEST_CASE("composition: constructed unit case") {
  // delta = e^{-1/2} makes 2 sqrt(2 ln(1/delta)) = 2.
  CHECK(compose_per_query_epsilon(PrivacyParams(0.5, std::exp(-0.5)), 1) ==
        Catch::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("composition: exact 1/sqrt(k) scaling") {
  const PrivacyParams target(0.3, 1e-6);
  CHECK(compose_per_query_epsilon(target, 400) ==
        Catch::Approx(compose_per_query_epsilon(target, 100) / 2)
            .epsilon(1e-14));
}

TEST_CASE("composition input validation") {
  CHECK_THROWS_AS(compose_per_query_epsilon(PrivacyParams(0.0, 1e-5), 10),
                  InvalidParameter);
  CHECK_THROWS_AS(compose_per_query_epsilon(PrivacyParams(0.5, 0.0), 10),
                  InvalidParameter);
  CHECK_THROWS_AS(compose_per_query_epsilon(PrivacyParams(0.5, 1e-5), 0),
                  InvalidParameter);
}

TEST_CASE("privacy params validation") {
  CHECK_THROWS_AS(PrivacyParams(-0.1, 0.5), InvalidParameter);
  CHECK_THROWS_AS(PrivacyParams(0.1, 1.0), InvalidParameter);
  CHECK_THROWS_AS(PrivacyParams(0.1, -0.1), InvalidParameter);
}

TEST_CASE("ledger charges up to k then refuses") {
  BudgetLedger ledger(PrivacyParams(0.1, 1e-5), 3);
  CHECK(ledger.per_query_epsilon() ==
        Catch::Approx(compose_per_query_epsilon(PrivacyParams(0.1, 1e-5), 3))
            .epsilon(1e-14));
  CHECK(ledger.queries_used() == 0);
  ledger.charge();
  CHECK(ledger.queries_used() == 1);
  CHECK(ledger.remaining() == 2);
  ledger.charge();
  ledger.charge();
  CHECK(ledger.exhausted());
  std::size_t errors = 0;
  try {
    ledger.charge();
  } catch (const BudgetExhausted&) {
    ++errors;
  }
  CHECK(errors == 1);
  CHECK(ledger.queries_used() == 3);
}
