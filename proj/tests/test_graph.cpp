#include "support.hpp"

#include "swifeed/error.hpp"
#include "swifeed/graph.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace swifeed;
using Edges = std::vector<Adjacency::Edge>;

TEST_SUITE("graph") {

TEST_CASE("path graph of three") {
    Edges e{{0, 1}, {1, 2}};
    auto adj = Adjacency::from_edges(3, e);
    CHECK(adj.has_edge(0, 1));
    CHECK(adj.has_edge(1, 0));
    CHECK_FALSE(adj.has_edge(0, 2));
    CHECK_FALSE(adj.has_edge(0, 0));
    auto st = graph_stats(adj);
    CHECK(st.edges == 2);
    CHECK(st.components == 1);
    CHECK(st.min_degree == 1);
    CHECK(st.max_degree == 2);
    CHECK(st.mean_degree == doctest::Approx(4.0 / 3.0));
}

TEST_CASE("parallel pipes saturate") {
    auto net = testing::make_network({{"J1", {0, 0}}, {"J2", {1, 0}}}, {{"J1", "J2"}, {"J2", "J1"}});
    auto adj = build_adjacency(net);
    CHECK(adj.edge_count() == 1);
    CHECK(adj.degree(0) == 1);
    CHECK(degree_centrality(adj).centrality[0] == 1.0);
}

TEST_CASE("star and cycle centralities") {
    Edges star{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    auto c = degree_centrality(Adjacency::from_edges(5, star));
    CHECK(c.centrality[0] == 1.0);
    for (std::size_t i = 1; i < 5; ++i) CHECK(c.centrality[i] == 0.25);

    for (std::size_t n : {3u, 7u, 40u}) {
        Edges cyc;
        for (std::size_t i = 0; i < n; ++i) cyc.push_back({i, (i + 1) % n});
        auto cc = degree_centrality(Adjacency::from_edges(n, cyc));
        for (double v : cc.centrality) CHECK(v == 2.0 / static_cast<double>(n - 1));
    }
}

TEST_CASE("two disjoint triangles") {
    Edges e{{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}};
    CHECK(graph_stats(Adjacency::from_edges(6, e)).components == 2);
}

TEST_CASE("isolated node counts as a component and keeps the global denominator") {
    Edges e{{0, 1}};
    auto adj = Adjacency::from_edges(3, e);
    CHECK(graph_stats(adj).components == 2);
    auto c = degree_centrality(adj);
    CHECK(c.centrality[0] == 0.5);
    CHECK(c.centrality[2] == 0.0);
}

TEST_CASE("from_edges rejects tiny graphs and self edges") {
    Edges none;
    CHECK_THROWS_AS(Adjacency::from_edges(1, none), Error);
    Edges self{{1, 1}};
    try {
        Adjacency::from_edges(3, self);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SelfLoop);
    }
}

TEST_CASE("random graphs match the dense reference") {
    std::mt19937_64 gen(0xC0FFEE);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(gen() % 200);
        const double p = std::uniform_real_distribution<double>(0.0, 0.1)(gen);
        auto g = testing::random_graph(gen, n, p);
        auto adj = Adjacency::from_edges(n, g.edges, g.ids);
        auto ref = testing::dense_adjacency(g);
        auto cv = degree_centrality(adj);
        std::size_t degree_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int row = std::accumulate(ref[i].begin(), ref[i].end(), 0);
            CHECK(cv.degree[i] == static_cast<std::size_t>(row));
            CHECK(cv.centrality[i] == static_cast<double>(row) / static_cast<double>(n - 1));
            CHECK(cv.degree[i] <= n - 1);
            for (std::size_t j = 0; j < n; ++j) CHECK(adj.has_edge(i, j) == (ref[i][j] == 1));
            degree_sum += cv.degree[i];
        }
        CHECK(degree_sum == 2 * adj.edge_count());
        auto dmax = std::max_element(cv.degree.begin(), cv.degree.end()) - cv.degree.begin();
        auto cmax = std::max_element(cv.centrality.begin(), cv.centrality.end()) - cv.centrality.begin();
        CHECK(dmax == cmax);
    }
}

TEST_CASE("adding an edge moves exactly two entries by 1/(N-1)") {
    std::mt19937_64 gen(99);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + static_cast<std::size_t>(gen() % 60);
        auto g = testing::random_graph(gen, n, 0.08);
        auto before = degree_centrality(Adjacency::from_edges(n, g.edges));
        auto ref = testing::dense_adjacency(g);
        std::size_t u = 0, v = 0;
        do {
            u = static_cast<std::size_t>(gen() % n);
            v = static_cast<std::size_t>(gen() % n);
        } while (u == v || ref[u][v] == 1);
        g.edges.push_back({u, v});
        auto after = degree_centrality(Adjacency::from_edges(n, g.edges));
        const double step = 1.0 / static_cast<double>(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            if (i == u || i == v)
                CHECK(after.centrality[i] ==
                      doctest::Approx(before.centrality[i] + step).epsilon(1e-12));
            else
                CHECK(after.centrality[i] == before.centrality[i]);
        }
    }
}

TEST_CASE("pumps and valves count as edges") {
    auto net = load_network(testing::data_path("fifty_node.inp").string());
    auto adj = build_adjacency(net);
    const auto r1 = *net.find_node("R1");
    const auto j1 = *net.find_node("J1");
    CHECK(adj.has_edge(r1, j1));
    const auto j5 = *net.find_node("J5");
    const auto j15 = *net.find_node("J15");
    CHECK(adj.has_edge(j5, j15));
    CHECK(graph_stats(adj).components == 1);
}

TEST_CASE("centrality csv has one row per node") {
    auto net = load_network(testing::data_path("fifty_node.inp").string());
    auto adj = build_adjacency(net);
    std::ostringstream out;
    write_centrality_csv(out, adj, degree_centrality(adj));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "node_id,degree,centrality");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 50);
}

}  // TEST_SUITE
