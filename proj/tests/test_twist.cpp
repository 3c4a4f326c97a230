#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pfr/exact.hpp"
#include "pfr/twist.hpp"

using namespace pfr;
using testutil::dense;

TEST_CASE("doob_transform on the 2x2 benchmark") {
    auto B = testutil::asym2();
    auto sol = solve_exact(B, 0);
    auto tc = doob_transform(B, sol);
    CHECK(tc.P_star.entry(0, 0) == doctest::Approx(0.4).epsilon(1e-10));
    CHECK(tc.P_star.entry(0, 1) == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(tc.P_star.entry(1, 0) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(tc.P_star.entry(1, 1) == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(tc.pi_star[0] == doctest::Approx(4.0 / 7.0).epsilon(1e-10));
    CHECK(tc.pi_star[1] == doctest::Approx(3.0 / 7.0).epsilon(1e-10));
    CHECK(tc.normalizer == doctest::Approx(1.75).epsilon(1e-10));
    CHECK(verify_stationarity(tc) <= 1e-12);
}

TEST_CASE("doob_transform trivial cases") {
    auto one = dense(1, {0.7});
    auto tc1 = doob_transform(one, solve_exact(one));
    CHECK(tc1.P_star.entry(0, 0) == doctest::Approx(1.0));
    CHECK(tc1.pi_star[0] == doctest::Approx(1.0));
    CHECK(verify_stationarity(tc1) == 0.0);

    // stochastic B: lambda* = 1, u* constant, so P* = B entry for entry
    auto S = dense(2, {0.3, 0.7, 0.6, 0.4});
    auto tcs = doob_transform(S, solve_exact(S));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(tcs.P_star.entry(i, j) ==
                  doctest::Approx(S.entry(i, j)).epsilon(1e-10));
}

TEST_CASE("P* rows are stochastic on random instances") {
    CycleRng rng(53, 0);
    for (int trial = 0; trial < 10; ++trial) {
        auto B = testutil::random_substochastic(20, rng);
        if (!analyze_graph(B).irreducible) continue;
        auto tc = doob_transform(B, solve_exact(B));
        for (double rs : tc.P_star.row_sums())
            CHECK(rs == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(verify_stationarity(tc) <= 1e-8);
    }
}

TEST_CASE("pi* is invariant under eigenvector rescaling") {
    auto B = testutil::asym2();
    auto sol = solve_exact(B, 0);
    auto base = doob_transform(B, sol);
    for (auto& v : sol.u_star) v *= 3.0;
    for (auto& v : sol.eta_star) v *= 0.2;
    auto scaled = doob_transform(B, sol);
    for (int i = 0; i < 2; ++i)
        CHECK(scaled.pi_star[i] ==
              doctest::Approx(base.pi_star[i]).epsilon(1e-12));
}

TEST_CASE("power limit converges on the 2x2 benchmark") {
    auto B = testutil::asym2();
    auto sol = solve_exact(B, 0);
    auto errs = verify_power_limit(B, sol, 1, 200);
    REQUIRE(errs.size() == 200);
    CHECK(errs.back() < 1e-6);
    CHECK(errs.back() <= errs.front());
}

TEST_CASE("power limit needs the Cesaro average on periodic chains") {
    auto B = dense(2, {0, 0.5, 0.5, 0});
    auto sol = solve_exact(B, 0);
    // un-averaged scaled even powers never develop off-diagonal mass:
    // lambda^-2n B^2n (0,1) = 0 for all n, so the plain limit fails...
    CHECK(B.entry(0, 1) > 0); // ...while B itself is irreducible
    // ...but the period-2 average settles on u* eta*^T / <u*, eta*>
    auto errs = verify_power_limit(B, sol, 2, 50);
    CHECK(errs.back() < 1e-12);

    auto one = dense(1, {0.7});
    auto es = verify_power_limit(one, solve_exact(one), 1, 5);
    for (double e : es) CHECK(e <= 1e-14);
}

TEST_CASE("uniqueness probe") {
    auto B = testutil::asym2();
    auto sol = solve_exact(B, 0);
    CHECK(uniqueness_probe(B, sol, 10, 7));

    auto P2 = dense(2, {0, 0.5, 0.5, 0});
    CHECK(uniqueness_probe(P2, solve_exact(P2, 0), 10, 7));

    CycleRng rng(59, 0);
    for (int trial = 0; trial < 5; ++trial) {
        auto R = testutil::random_substochastic(8, rng);
        if (!analyze_graph(R).irreducible) continue;
        CHECK(uniqueness_probe(R, solve_exact(R), 5, trial));
    }
}
