#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "pfr/matrix.hpp"

using namespace pfr;
using testutil::dense;

TEST_CASE("load_matrix parses the coordinate format") {
    auto B = load_matrix("2\n0 0 0.2\n0 1 0.4\n1 0 0.3\n1 1 0.1");
    CHECK(B.size() == 2);
    CHECK(B.entry(0, 0) == doctest::Approx(0.2));
    CHECK(B.entry(0, 1) == doctest::Approx(0.4));
    CHECK(B.entry(1, 0) == doctest::Approx(0.3));
    CHECK(B.entry(1, 1) == doctest::Approx(0.1));

    auto one = load_matrix("1\n0 0 0.7");
    CHECK(one.size() == 1);
    CHECK(one.entry(0, 0) == doctest::Approx(0.7));
}

TEST_CASE("load_matrix accepts comments and blank lines") {
    auto B = load_matrix("# header\n\n2\n0 1 1.5  # edge\n1 0 2\n");
    CHECK(B.entry(0, 1) == doctest::Approx(1.5));
    CHECK(B.entry(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("load_matrix rejects bad input") {
    CHECK_THROWS_WITH_AS(load_matrix("2\n0 0 -1"),
                         doctest::Contains("line 2"), Error);
    CHECK_THROWS_AS(load_matrix("2\n0 2 0.5"), Error);
    CHECK_THROWS_AS(load_matrix("2\n0 1 0.5\n0 1 0.25"), Error);
    CHECK_THROWS_AS(load_matrix("not a matrix"), Error);
    CHECK_THROWS_AS(load_matrix(""), Error);
    try {
        load_matrix("2\n0 0 -1");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::parse);
        CHECK(e.is_usage());
    }
}

TEST_CASE("normalize scales by the max row sum") {
    auto r1 = normalize(testutil::asym2());
    CHECK(r1.s == 1.0); // already sub-stochastic: left alone
    CHECK(r1.B.entry(0, 1) == 0.4);

    auto r2 = normalize(dense(2, {2, 2, 2, 2}));
    CHECK(r2.s == doctest::Approx(4.0));
    CHECK(r2.B.entry(1, 0) == doctest::Approx(0.5));

    auto r3 = normalize(dense(2, {0, 3, 1, 0}));
    CHECK(r3.s == doctest::Approx(3.0));
    CHECK(r3.B.entry(0, 1) == doctest::Approx(1.0));
    CHECK(r3.B.entry(1, 0) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("normalize round-trips") {
    CycleRng rng(11, 0);
    auto G = testutil::random_substochastic(7, rng).scaled(5.3);
    auto r = normalize(G);
    CHECK(r.B.max_row_sum() <= 1.0 + 1e-14);
    for (const auto& t : G.triplets())
        CHECK(r.s * r.B.entry(t.row, t.col) ==
              doctest::Approx(t.value).epsilon(1e-12));
}

TEST_CASE("normalize rejects the zero matrix") {
    CHECK_THROWS_AS(normalize(NonNegMatrix::from_triplets(2, {})), Error);
}

TEST_CASE("analyze_graph: irreducibility and period") {
    auto g1 = analyze_graph(testutil::asym2());
    CHECK(g1.irreducible);
    CHECK(g1.period == 1);

    auto g2 = analyze_graph(dense(2, {0, 0.5, 0.5, 0}));
    CHECK(g2.irreducible);
    CHECK(g2.period == 2);

    auto g3 = analyze_graph(dense(2, {0.5, 0.5, 0, 0.5}));
    CHECK_FALSE(g3.irreducible);
    REQUIRE(g3.scc_witness.has_value());
    CHECK(g3.scc_witness->first == 1);
    CHECK(g3.scc_witness->second == 0);
}

TEST_CASE("analyze_graph: period is permutation invariant") {
    // 3-ring, period 3, under the permutation (0 1 2) -> (2 0 1)
    auto a = dense(3, {0, 1, 0, 0, 0, 1, 1, 0, 0});
    auto b = dense(3, {0, 0, 1, 1, 0, 0, 0, 1, 0});
    CHECK(analyze_graph(a).period == 3);
    CHECK(analyze_graph(b).period == 3);
}

TEST_CASE("analyze_graph: any self-loop forces period 1") {
    CycleRng rng(5, 0);
    for (int trial = 0; trial < 20; ++trial) {
        auto B = testutil::random_substochastic(6, rng);
        auto g = analyze_graph(B);
        if (!g.irreducible) continue;
        bool loop = false;
        for (int i = 0; i < 6; ++i) loop = loop || B.entry(i, i) > 0;
        if (loop) CHECK(g.period == 1);
    }
}

TEST_CASE("augment computes kill probabilities") {
    auto a1 = augment(testutil::asym2());
    CHECK(a1.kill_prob[0] == doctest::Approx(0.4));
    CHECK(a1.kill_prob[1] == doctest::Approx(0.6));

    auto a2 = augment(dense(2, {0.5, 0.5, 0.5, 0.5}));
    CHECK(a2.kill_prob[0] == doctest::Approx(0.0));
    CHECK(a2.kill_prob[1] == doctest::Approx(0.0));

    auto a3 = augment(dense(1, {0.7}));
    CHECK(a3.kill_prob[0] == doctest::Approx(0.3));
}

TEST_CASE("augment extends every row to a stochastic one") {
    CycleRng rng(17, 0);
    auto B = testutil::random_substochastic(9, rng);
    auto ac = augment(B);
    for (int i = 0; i < 9; ++i)
        CHECK(ac.kill_prob[i] + B.row_sums()[i] == doctest::Approx(1.0));
    CHECK_THROWS_AS(augment(dense(1, {1.5})), Error);
}

TEST_CASE("row_sums metadata is consistent") {
    CycleRng rng(23, 0);
    auto B = testutil::random_substochastic(8, rng);
    for (int i = 0; i < 8; ++i) {
        double s = 0;
        for (double v : B.row_vals(i)) s += v;
        CHECK(B.row_sums()[i] == doctest::Approx(s).epsilon(1e-14));
    }
}

TEST_CASE("spectral_radius matches known values") {
    CHECK(spectral_radius(testutil::asym2()) == doctest::Approx(0.5));
    CHECK(spectral_radius(dense(2, {0, 0.5, 0.5, 0})) == doctest::Approx(0.5));
    CHECK(spectral_radius(dense(1, {0.7})) == doctest::Approx(0.7));
}

TEST_CASE("spectral_radius agrees with the dense oracle on random input") {
    CycleRng rng(31, 0);
    for (int trial = 0; trial < 10; ++trial) {
        auto B = testutil::random_substochastic(12, rng);
        if (!analyze_graph(B).irreducible) continue;
        CHECK(spectral_radius(B) ==
              doctest::Approx(testutil::power_oracle(B)).epsilon(1e-8));
    }
}
