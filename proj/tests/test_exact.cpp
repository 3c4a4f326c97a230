#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pfr/exact.hpp"

using namespace pfr;
using testutil::dense;

TEST_CASE("taboo_decompose extracts Q, r, c, b_zz") {
    auto td = taboo_decompose(testutil::asym2(), 0);
    CHECK(td.Q.entry(0, 0) == doctest::Approx(0.1));
    CHECK(td.r[0] == doctest::Approx(0.4));
    CHECK(td.c[0] == doctest::Approx(0.3));
    CHECK(td.b_zz == doctest::Approx(0.2));
    CHECK(td.rho_q == doctest::Approx(0.1));

    auto td2 = taboo_decompose(dense(2, {0, 0.5, 0.5, 0}), 0);
    CHECK(td2.Q.nnz() == 0);
    CHECK(td2.r[0] == doctest::Approx(0.5));
    CHECK(td2.c[0] == doctest::Approx(0.5));
    CHECK(td2.b_zz == 0.0);

    auto td3 = taboo_decompose(dense(1, {0.7}), 0);
    CHECK(td3.n == 1);
    CHECK(td3.b_zz == doctest::Approx(0.7));
    CHECK(td3.rho_q == 0.0);
}

TEST_CASE("taboo_decompose rejects reducible input") {
    CHECK_THROWS_AS(taboo_decompose(dense(2, {0.5, 0.5, 0, 0.5}), 0), Error);
}

TEST_CASE("cycle_transform_h evaluates the excursion series") {
    auto td = taboo_decompose(testutil::asym2(), 0);
    // s = 2: 2*0.2 + 4*0.4*0.3/(1 - 2*0.1) = 0.4 + 0.48/0.8 = 1
    auto h1 = cycle_transform_h(td, std::log(2.0));
    REQUIRE(h1.has_value());
    CHECK(*h1 == doctest::Approx(1.0).epsilon(1e-12));
    // s = 1: return-before-killing probability
    auto h0 = cycle_transform_h(td, 0.0);
    REQUIRE(h0.has_value());
    CHECK(*h0 == doctest::Approx(0.2 + 0.12 / 0.9));

    auto td1 = taboo_decompose(dense(1, {0.7}), 0);
    auto h = cycle_transform_h(td1, 0.0);
    REQUIRE(h.has_value());
    CHECK(*h == doctest::Approx(0.7));
}

TEST_CASE("cycle_transform_h signals divergence beyond the taboo radius") {
    auto td = taboo_decompose(testutil::asym2(), 0);
    // e^theta >= 1/rho_Q = 10
    CHECK_FALSE(cycle_transform_h(td, std::log(11.0)).has_value());
}

TEST_CASE("cycle_transform_h derivative matches finite differences") {
    auto td = taboo_decompose(testutil::asym2(), 0);
    double hp = 0.0;
    double th = 0.3;
    auto h = cycle_transform_h(td, th, &hp);
    REQUIRE(h.has_value());
    double d = 1e-6;
    auto hplus = cycle_transform_h(td, th + d);
    auto hminus = cycle_transform_h(td, th - d);
    CHECK(hp == doctest::Approx((*hplus - *hminus) / (2 * d)).epsilon(1e-6));
}

TEST_CASE("solve_theta on closed-form instances") {
    auto t1 = solve_theta(taboo_decompose(dense(1, {0.7}), 0));
    CHECK(t1.theta == doctest::Approx(-std::log(0.7)).epsilon(1e-10));
    CHECK(t1.lambda_star == doctest::Approx(0.7).epsilon(1e-10));

    auto t2 = solve_theta(taboo_decompose(testutil::asym2(), 0));
    CHECK(t2.lambda_star == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(t2.h_residual <= 1e-10);
    CHECK(t2.h_prime > 0); // A2 witness: E tau e^{theta tau} finite, positive

    auto t3 = solve_theta(taboo_decompose(dense(2, {0, 0.5, 0.5, 0}), 0));
    CHECK(t3.lambda_star == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("solve_theta: stochastic irreducible gives theta = 0") {
    auto ts = solve_theta(taboo_decompose(dense(2, {0.5, 0.5, 0.5, 0.5}), 1));
    CHECK(std::abs(ts.theta) <= 1e-10);
    CHECK(ts.lambda_star == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("h is strictly increasing on its domain") {
    auto td = taboo_decompose(testutil::asym2(), 1);
    double prev = -1;
    for (double th = -2.0; th < 1.2; th += 0.1) {
        auto h = cycle_transform_h(td, th);
        if (!h) break;
        CHECK(*h > prev);
        prev = *h;
    }
}

TEST_CASE("eigenvectors on closed-form instances") {
    auto B = testutil::asym2();
    auto sol = solve_exact(B, 0);
    CHECK(sol.u_star[0] == 1.0);
    CHECK(sol.u_star[1] == doctest::Approx(0.75).epsilon(1e-10));
    CHECK(sol.eta_star[0] == 1.0);
    CHECK(sol.eta_star[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(sol.eig_residual_u <= 1e-8);
    CHECK(sol.eig_residual_eta <= 1e-8);

    auto s1 = solve_exact(dense(1, {0.7}));
    CHECK(s1.u_star[0] == 1.0);
    CHECK(s1.eta_star[0] == 1.0);

    auto s2 = solve_exact(dense(2, {0, 0.5, 0.5, 0}), 0);
    CHECK(s2.u_star[1] == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s2.eta_star[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("solve_exact residuals stay small on random instances") {
    CycleRng rng(41, 0);
    for (int trial = 0; trial < 15; ++trial) {
        auto B = testutil::random_substochastic(10, rng);
        if (!analyze_graph(B).irreducible) continue;
        auto sol = solve_exact(B);
        CHECK(sol.eig_residual_u <= 1e-8);
        CHECK(sol.eig_residual_eta <= 1e-8);
        for (double v : sol.u_star) CHECK(v > 0);
        for (double v : sol.eta_star) CHECK(v > 0);
        CHECK(sol.u_star[sol.z] == 1.0);
        CHECK(sol.eta_star[sol.z] == 1.0);
        CHECK(sol.lambda_star ==
              doctest::Approx(testutil::power_oracle(B)).epsilon(1e-8));
    }
}

TEST_CASE("check_theorem3_gap") {
    auto B = testutil::asym2();
    auto g = check_theorem3_gap(B, taboo_decompose(B, 0));
    CHECK(g.theta1 == doctest::Approx(-std::log(0.5)).epsilon(1e-8));
    CHECK(g.theta2 == doctest::Approx(-std::log(0.1)).epsilon(1e-8));
    CHECK(g.satisfied);

    auto one = dense(1, {0.7});
    auto g1 = check_theorem3_gap(one, taboo_decompose(one, 0));
    CHECK(g1.theta1 == doctest::Approx(-std::log(0.7)).epsilon(1e-8));
    CHECK(std::isinf(g1.theta2));
    CHECK(g1.satisfied);

    auto flip = dense(2, {0, 1, 1, 0}); // stochastic, never killed
    auto g2 = check_theorem3_gap(flip, taboo_decompose(flip, 0));
    CHECK(std::abs(g2.theta1) <= 1e-8);
    CHECK(std::isinf(g2.theta2));
    CHECK(g2.satisfied);
}

TEST_CASE("solidarity: theta is independent of the regeneration state") {
    CHECK(solidarity_scan(testutil::asym2()) <= 1e-10);
    CHECK(solidarity_scan(dense(1, {0.7})) == 0.0);

    CycleRng rng(43, 0);
    for (int trial = 0; trial < 5; ++trial) {
        auto B = testutil::random_substochastic(10, rng);
        if (!analyze_graph(B).irreducible) continue;
        CHECK(solidarity_scan(B) <= 1e-8);
    }
}

TEST_CASE("default regeneration state is a median row-sum maximizer") {
    // single maximizer
    CHECK(default_regeneration_state(testutil::asym2()) == 0);
    // bd-like tie: all interior rows sum to 1
    auto B = dense(3, {0, 0.3, 0, 0.7, 0, 0.3, 0, 0.7, 0});
    CHECK(default_regeneration_state(B) == 1);
}
