#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "pairrank/graph.hpp"
#include "pairrank/spectral.hpp"

using namespace pairrank;

TEST_CASE("erdos_renyi basics", "[graph]") {
    SECTION("p = 1 forces the single edge on two nodes") {
        for (std::uint64_t seed : {1ULL, 7ULL, 1234567ULL}) {
            auto g = erdos_renyi(2, 1.0, seed);
            REQUIRE(g.edge_count() == 1);
            REQUIRE(g.edges()[0] == std::pair<int, int>(0, 1));
        }
    }
    SECTION("parameter validation") {
        REQUIRE_THROWS_AS(erdos_renyi(3, 0.0, 1), parameter_error);
        REQUIRE_THROWS_AS(erdos_renyi(3, -0.1, 1), parameter_error);
        REQUIRE_THROWS_AS(erdos_renyi(3, 1.5, 1), parameter_error);
        REQUIRE_THROWS_AS(erdos_renyi(1, 0.5, 1), parameter_error);
    }
    SECTION("same seed, same edge set") {
        auto a = erdos_renyi(60, 0.2, 42);
        auto b = erdos_renyi(60, 0.2, 42);
        REQUIRE(a.edges() == b.edges());
        auto c = erdos_renyi(60, 0.2, 43);
        REQUIRE(a.edges() != c.edges());
    }
}

TEST_CASE("erdos_renyi edge-count concentration", "[graph][slow]") {
    // E[M] = C(400,2) * 0.16 = 12768, sd of the mean over 100 seeds is
    // sqrt(C(400,2) * p(1-p)) / 10 ~ 10.36.
    const double expected = 79800.0 * 0.16;
    const double sd_mean = std::sqrt(79800.0 * 0.16 * 0.84) / 10.0;
    double total = 0.0;
    for (int s = 0; s < 100; ++s) total += erdos_renyi(400, 0.16, 9000 + s).edge_count();
    const double mean = total / 100.0;
    REQUIRE(std::abs(mean - expected) < 3.0 * sd_mean);
}

TEST_CASE("connectivity labeling", "[graph]") {
    SECTION("path is connected") {
        auto g = ComparisonGraph::from_edges(3, {{0, 1}, {1, 2}});
        REQUIRE(is_connected(g));
    }
    SECTION("two disjoint edges") {
        auto g = ComparisonGraph::from_edges(4, {{0, 1}, {2, 3}});
        auto c = components(g);
        REQUIRE_FALSE(c.connected);
        REQUIRE(c.count == 2);
        REQUIRE(c.label == std::vector<int>{0, 0, 1, 1});
    }
    SECTION("ER above the connectivity threshold is connected nearly always") {
        int connected_count = 0;
        for (int s = 0; s < 100; ++s)
            if (is_connected(erdos_renyi(400, 0.16, 77000 + s))) ++connected_count;
        REQUIRE(connected_count >= 99);
    }
}

TEST_CASE("graph validation", "[graph]") {
    REQUIRE_THROWS_AS(ComparisonGraph::from_edges(3, {{0, 0}}), parameter_error);
    REQUIRE_THROWS_AS(ComparisonGraph::from_edges(3, {{0, 1}, {1, 0}}), parameter_error);
    REQUIRE_THROWS_AS(ComparisonGraph::from_edges(3, {{0, 3}}), parameter_error);
    auto g = ComparisonGraph::from_edges(3, {{2, 0}});
    REQUIRE(g.edges()[0] == std::pair<int, int>(0, 2)); // canonicalized
}

TEST_CASE("row norms", "[graph]") {
    // star on 5 nodes: center 0
    auto star = ComparisonGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    REQUIRE(star.row_norm_sq(0) == 20.0);
    REQUIRE(star.row_norm_sq(1) == 2.0);
    auto g = ComparisonGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}});
    REQUIRE(g.row_norm_sq(0) == 12.0); // degree 3
    REQUIRE(g.row_norm_sq(4) == 0.0);  // isolated
    REQUIRE_THROWS_AS(g.row_norm_sq(5), parameter_error);
    REQUIRE_THROWS_AS(g.row_norm_sq(-1), parameter_error);
}

TEST_CASE("implicit Laplacian rows", "[graph]") {
    // every row sums to zero (A 1 = 0) and has the advertised norm
    auto rng = make_rng(5);
    for (int rep = 0; rep < 20; ++rep) {
        auto g = erdos_renyi(30, 0.2, 400 + rep);
        LaplacianView lap(g);
        std::vector<double> ones(30, 1.0);
        for (int i = 0; i < 30; ++i) {
            REQUIRE(lap.apply_row(i, ones) == 0.0);
            const double d = g.degree(i);
            REQUIRE(lap.row_norm_sq(i) == d * d + d);
        }
        // <a_i, x> against the dense row
        std::vector<double> x(30);
        for (auto& v : x) v = uniform01(rng) - 0.5;
        const auto A = oracles::dense_laplacian(g);
        for (int i = 0; i < 30; ++i) {
            double dense = 0.0;
            for (int j = 0; j < 30; ++j) dense += A(i, j) * x[j];
            REQUIRE_THAT(lap.apply_row(i, x), Catch::Matchers::WithinAbs(dense, 1e-12));
        }
    }
}

TEST_CASE("extreme Laplacian eigenvalues", "[graph]") {
    SECTION("single edge") {
        auto g = ComparisonGraph::from_edges(2, {{0, 1}});
        auto s = laplacian_extreme_eigenvalues(g);
        REQUIRE_THAT(s.lambda_max, Catch::Matchers::WithinAbs(2.0, 1e-8));
        REQUIRE_THAT(s.lambda_min_nonzero, Catch::Matchers::WithinAbs(2.0, 1e-8));
    }
    SECTION("complete graph K4") {
        auto g = ComparisonGraph::from_edges(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
        auto s = laplacian_extreme_eigenvalues(g);
        REQUIRE_THAT(s.lambda_max, Catch::Matchers::WithinRel(4.0, 1e-8));
        REQUIRE_THAT(s.lambda_min_nonzero, Catch::Matchers::WithinRel(4.0, 1e-8));
    }
    SECTION("path on three nodes") {
        auto g = ComparisonGraph::from_edges(3, {{0, 1}, {1, 2}});
        auto s = laplacian_extreme_eigenvalues(g);
        REQUIRE_THAT(s.lambda_max, Catch::Matchers::WithinRel(3.0, 1e-8));
        REQUIRE_THAT(s.lambda_min_nonzero, Catch::Matchers::WithinRel(1.0, 1e-8));
    }
    SECTION("matches a dense eigensolver on random connected graphs") {
        for (int rep = 0; rep < 12; ++rep) {
            const int n = 5 + (rep * 7) % 45;
            auto g = oracles::random_connected_graph(n, 800 + rep);
            auto s = laplacian_extreme_eigenvalues(g);
            auto ev = oracles::laplacian_eigenvalues(g);
            REQUIRE_THAT(s.lambda_max, Catch::Matchers::WithinRel(ev[n - 1], 1e-6));
            REQUIRE_THAT(s.lambda_min_nonzero, Catch::Matchers::WithinRel(ev[1], 1e-6));
        }
    }
    SECTION("disconnected graph is flagged and reports ~0") {
        auto g = ComparisonGraph::from_edges(4, {{0, 1}, {2, 3}});
        auto s = laplacian_extreme_eigenvalues(g);
        REQUIRE_FALSE(s.connected);
        REQUIRE(std::abs(s.lambda_min_nonzero) < 1e-6);
    }
}

TEST_CASE("edge list round trip", "[graph][io]") {
    auto g = erdos_renyi(25, 0.3, 99);
    std::stringstream ss;
    write_edge_list(ss, g);
    auto h = read_edge_list(ss);
    REQUIRE(h.node_count() == g.node_count());
    REQUIRE(h.edges() == g.edges());
}
