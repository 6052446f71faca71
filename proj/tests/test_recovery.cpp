// Copyright 2026 The robustsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "robustsim/recovery.hpp"

#include <cmath>
#include <vector>

#include <stdexcept>

#include <doctest.h>

using namespace robustsim;

namespace {

// Independent oracle: sum the pmf terms via lgamma, entirely separate from
// the library's multiplicative recurrence.
double lgamma_binomial_cdf(int n, double p, int k) {
  if (k < 0) return 0.0;
  if (k >= n || p == 0.0) return 1.0;
  if (p == 1.0) return 0.0;
  long double cdf = 0.0L;
  const long double log_p = std::log(static_cast<long double>(p));
  const long double log_q = std::log(1.0L - static_cast<long double>(p));
  for (int i = 0; i <= k; ++i) {
    long double log_pmf = std::lgamma(n + 1.0L) - std::lgamma(i + 1.0L) -
                          std::lgamma(n - i + 1.0L) + i * log_p +
                          (n - i) * log_q;
    cdf += std::exp(log_pmf);
  }
  return static_cast<double>(cdf);
}

int oracle_size_pool(int n, double p, double q) {
  for (int s = 0; s <= n; ++s) {
    if (lgamma_binomial_cdf(n, p, s) >= q) {
      return s;
    }
  }
  return n;
}

}  // namespace

TEST_CASE("size_pool boundary cases") {
  CHECK(size_pool(1024, 0.0) == 0);
  CHECK(size_pool(1, 1.0) == 1);
  CHECK(size_pool(16, 1.0) == 16);
}

TEST_CASE("size_pool(1024, 1e-3) provisions four standbys") {
  CHECK(size_pool(1024, 0.001) == 4);
  // The defining inequality, against the independent summation.
  CHECK(lgamma_binomial_cdf(1024, 0.001, 3) < 0.99);
  CHECK(lgamma_binomial_cdf(1024, 0.001, 4) >= 0.99);
  CHECK(binomial_cdf(1024, 0.001, 3) ==
        doctest::Approx(lgamma_binomial_cdf(1024, 0.001, 3)).epsilon(1e-9));
}

TEST_CASE("size_pool equals the exact-CDF oracle across the grid") {
  for (int n : {16, 128, 1024, 4096}) {
    for (double p : {0.0, 1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
      CHECK(size_pool(n, p) == oracle_size_pool(n, p, 0.99));
    }
  }
}

TEST_CASE("size_pool is monotone in p, N, and q") {
  const double ps[] = {0.0, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0};
  for (int n : {16, 128, 1024}) {
    int prev = -1;
    for (double p : ps) {
      int s = size_pool(n, p);
      CHECK(s >= prev);
      prev = s;
    }
  }
  for (double p : {1e-3, 1e-2, 0.1}) {
    CHECK(size_pool(128, p) <= size_pool(1024, p));
    CHECK(size_pool(1024, p, 0.9) <= size_pool(1024, p, 0.99));
    CHECK(size_pool(1024, p, 0.99) <= size_pool(1024, p, 0.999));
  }
}

TEST_CASE("size_pool rejects bad arguments") {
  CHECK_THROWS_AS(size_pool(0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(binomial_cdf(16, 1.5, 3), std::invalid_argument);
}

TEST_CASE("measured restart costs interpolate across scales") {
  CHECK(requeue_teardown_s(128) == doctest::Approx(454.0));
  CHECK(requeue_teardown_s(1024) == doctest::Approx(768.0));
  CHECK(requeue_teardown_s(192) == doctest::Approx((454.0 + 545.0) / 2));
  CHECK(requeue_teardown_s(64) == doctest::Approx(454.0));    // clamped
  CHECK(requeue_teardown_s(4096) == doctest::Approx(768.0));  // clamped

  CHECK(hot_update_restart_s(128) == doctest::Approx(46.0));
  CHECK(hot_update_restart_s(1024) == doctest::Approx(65.0));
}

TEST_CASE("per-scenario downtime respects the policy ordering") {
  RecoveryParams params;
  for (int scale : {128, 256, 512, 1024}) {
    for (int evictions : {1, 2, 4, 8, 32}) {
      for (int warm : {0, 2, 4}) {
        double ours = policy_downtime_s(RestartPolicy::ours, evictions, warm,
                                        params, scale);
        double oracle = policy_downtime_s(RestartPolicy::oracle, evictions,
                                          warm, params, scale);
        double reschedule = policy_downtime_s(RestartPolicy::reschedule,
                                              evictions, warm, params, scale);
        double requeue = policy_downtime_s(RestartPolicy::requeue, evictions,
                                           warm, params, scale);
        CHECK(oracle <= ours);
        CHECK(ours <= reschedule);
        CHECK(reschedule <= requeue);
      }
    }
  }
}

TEST_CASE("ours covers in-pool evictions at wake latency only") {
  RecoveryParams params;
  CHECK(policy_downtime_s(RestartPolicy::ours, 2, 4, params, 1024) ==
        doctest::Approx(params.wake_s));
  CHECK(policy_downtime_s(RestartPolicy::ours, 6, 4, params, 1024) ==
        doctest::Approx(params.init_s));
  CHECK(policy_downtime_s(RestartPolicy::oracle, 32, 0, params, 1024) ==
        doctest::Approx(params.wake_s));
}

TEST_CASE("WAS table reproduces the policy ordering at every scale") {
  RecoveryParams params;
  const int scales[] = {128, 256, 512, 1024};
  const RestartPolicy policies[] = {RestartPolicy::requeue,
                                    RestartPolicy::reschedule,
                                    RestartPolicy::oracle, RestartPolicy::ours};
  auto rows = was_table(scales, 0.001, 0.99, params, policies);
  REQUIRE(rows.size() == 4);
  for (const WasRow& row : rows) {
    double ours = row.was_s.at(RestartPolicy::ours);
    double oracle = row.was_s.at(RestartPolicy::oracle);
    double reschedule = row.was_s.at(RestartPolicy::reschedule);
    double requeue = row.was_s.at(RestartPolicy::requeue);
    CHECK(ours < reschedule);
    CHECK(reschedule < requeue);
    CHECK(oracle <= ours);
    CHECK(ours <= 2.0 * oracle);
  }
  CHECK(rows[3].pool_size == 4);
}

TEST_CASE("single-policy sweep yields a one-column table") {
  RecoveryParams params;
  const int scales[] = {128};
  const RestartPolicy policies[] = {RestartPolicy::ours};
  auto rows = was_table(scales, 0.001, 0.99, params, policies);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].was_s.size() == 1);
}

TEST_CASE("standby pool bookkeeping") {
  StandbyPool pool(4);
  pool.add(100, StandbyState::warm);
  pool.add(101, StandbyState::warm);
  pool.add(102, StandbyState::initializing);
  CHECK(pool.warm_count() == 2);
  CHECK(pool.initializing_count() == 1);

  auto taken = pool.withdraw_warm(3);
  CHECK(taken == std::vector<int>{100, 101});
  CHECK(pool.size() == 1);
  CHECK(pool.warm_count() == 0);

  pool.mark_warm(102);
  CHECK(pool.warm_count() == 1);
  CHECK_THROWS_AS(pool.add(102, StandbyState::warm), std::logic_error);
  CHECK_THROWS_AS(pool.mark_warm(999), std::logic_error);
}
