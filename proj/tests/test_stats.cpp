#include <doctest.h>

#include "shiftbai/rng.hpp"
#include "shiftbai/stats.hpp"

using namespace shiftbai;

TEST_CASE("record accumulates cells, totals and counts") {
  SufficientStats st(3);
  st.record(1, 1, 0.7);
  CHECK(st.count(1, 1) == 1);
  CHECK(st.total_count() == 1);
  CHECK(st.arm_total(1) == doctest::Approx(0.7));

  st.record(1, 0, 1.0);
  st.record(1, 0, 3.0);
  CHECK(st.cell_sum(0, 1) == doctest::Approx(4.0));
  CHECK(st.count(0, 1) == 2);
  CHECK(st.arm_mean(0) == doctest::Approx(2.0));
  CHECK(st.env_count(1) == 3);
  CHECK(st.env_total(1) == doctest::Approx(4.7));
  CHECK(st.sq_sum() == doctest::Approx(0.49 + 1.0 + 9.0));
}

TEST_CASE("record rejects skipped or rewound environments and bad arms") {
  SufficientStats st(2);
  st.record(1, 0, 0.0);
  CHECK_THROWS_AS(st.record(3, 0, 0.0), std::invalid_argument);  // skips environment 2
  st.record(2, 1, 0.0);
  CHECK_THROWS_AS(st.record(1, 0, 0.0), std::invalid_argument);  // environments only advance
  CHECK_THROWS_AS(st.record(2, 5, 0.0), std::invalid_argument);
}

TEST_CASE("connectivity requires a connected co-observation graph over all arms") {
  // Arms {1,2} env 1; {1,2,3} env 2; {4,5} env 3: two components.
  SufficientStats st(5);
  st.record(1, 0, 0.0);
  st.record(1, 1, 0.0);
  st.record(2, 0, 0.0);
  st.record(2, 1, 0.0);
  st.record(2, 2, 0.0);
  st.record(3, 3, 0.0);
  st.record(3, 4, 0.0);
  CHECK_FALSE(st.is_connected());

  // Arms {1,2} env 1; {2,3,5} env 2; {5,4} env 3: bridged into one component.
  SufficientStats st2(5);
  st2.record(1, 0, 0.0);
  st2.record(1, 1, 0.0);
  st2.record(2, 1, 0.0);
  st2.record(2, 2, 0.0);
  st2.record(2, 4, 0.0);
  st2.record(3, 4, 0.0);
  st2.record(3, 3, 0.0);
  CHECK(st2.is_connected());

  // A single environment containing every arm is a clique.
  SufficientStats st3(5);
  for (int i = 0; i < 5; ++i) st3.record(1, i, 0.0);
  CHECK(st3.is_connected());
}

TEST_CASE("connectivity needs every arm sampled") {
  SufficientStats st(3);
  st.record(1, 0, 0.0);
  st.record(1, 1, 0.0);
  CHECK_FALSE(st.is_connected());
  st.record(1, 2, 0.0);
  CHECK(st.is_connected());
}

TEST_CASE("aggregate identities hold under random recording") {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const int K = 2 + static_cast<int>(rng.bounded(5));
    SufficientStats st(K);
    const int J = 1 + static_cast<int>(rng.bounded(4));
    for (int j = 1; j <= J; ++j) {
      const int draws = 1 + static_cast<int>(rng.bounded(10));
      for (int k = 0; k < draws; ++k)
        st.record(j, static_cast<int>(rng.bounded(static_cast<std::uint64_t>(K))),
                  rng.uniform(-5.0, 5.0));
    }
    long n_from_cells = 0;
    double arm_sum = 0.0, env_sum = 0.0;
    for (int i = 0; i < K; ++i) {
      long per_arm = 0;
      double per_arm_total = 0.0;
      for (int j = 1; j <= st.num_envs(); ++j) {
        n_from_cells += st.count(i, j);
        per_arm += st.count(i, j);
        per_arm_total += st.cell_sum(i, j);
      }
      CHECK(per_arm == st.arm_count(i));
      CHECK(per_arm_total == doctest::Approx(st.arm_total(i)).epsilon(1e-12));
      arm_sum += st.arm_total(i);
    }
    for (int j = 1; j <= st.num_envs(); ++j) env_sum += st.env_total(j);
    CHECK(n_from_cells == st.total_count());
    CHECK(arm_sum == doctest::Approx(env_sum).epsilon(1e-12));
  }
}
