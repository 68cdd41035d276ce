#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "amod/net/density.hpp"
#include "amod/net/graph.hpp"
#include "amod/net/partition.hpp"
#include "amod/net/shortest_paths.hpp"
#include "oracles/dijkstra.hpp"
#include "oracles/random_graphs.hpp"

using namespace amod;

namespace {

net::RoadGraph triangle_graph() {
    // A-B 1, B-C 1, A-C 3, both directions
    std::vector<net::Node> nodes{{0, 0.0, 0.0}, {1, 1.0, 0.0}, {2, 2.0, 0.0}};
    std::vector<net::Link> links{{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}, {0, 2, 3.0}, {2, 0, 3.0}};
    return net::RoadGraph(std::move(nodes), std::move(links));
}

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

}  // namespace

TEST_CASE("grid generation produces the lattice", "[network]") {
    const auto tiny = net::generate_grid_network(2, 2, 1.0);
    CHECK(tiny.node_count() == 4);
    CHECK(tiny.link_count() == 8);
    for (const auto& l : tiny.links()) CHECK(l.length_km == 1.0);

    const auto desk = net::generate_grid_network(15, 15, 0.3);
    CHECK(desk.node_count() == 225);
    CHECK(desk.link_count() == 840);

    CHECK_THROWS_AS(net::generate_grid_network(1, 5, 1.0), ConfigError);
    CHECK_THROWS_AS(net::generate_grid_network(3, 3, 0.0), ConfigError);
}

TEST_CASE("network loading validates its inputs", "[network]") {
    const auto nodes = write_temp("amod_nodes.csv", "id,x,y\n0,0,0\n1,1,0\n2,2,0\n");
    const auto links = write_temp("amod_links.csv",
                                  "from,to,length_km\n0,1,1\n1,0,1\n1,2,1\n2,1,1\n0,2,3\n2,0,3\n");
    const auto g = net::load_network(nodes, links);
    CHECK(g.node_count() == 3);
    CHECK(g.link_count() == 6);

    SECTION("dangling endpoint") {
        const auto bad = write_temp("amod_links_dangling.csv", "from,to,length_km\n0,99,1\n1,0,1\n2,1,1\n");
        try {
            net::load_network(nodes, bad);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            CHECK(e.code == LoadErrc::dangling_endpoint);
        }
    }
    SECTION("non-positive length") {
        const auto bad =
            write_temp("amod_links_len.csv", "from,to,length_km\n0,1,0\n1,0,1\n1,2,1\n2,1,1\n0,2,3\n2,0,3\n");
        try {
            net::load_network(nodes, bad);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            CHECK(e.code == LoadErrc::nonpositive_length);
        }
    }
    SECTION("disconnected graph") {
        const auto nodes4 = write_temp("amod_nodes4.csv", "id,x,y\n0,0,0\n1,1,0\n2,2,0\n3,3,0\n");
        const auto bad = write_temp("amod_links_disc.csv", "from,to,length_km\n0,1,1\n1,0,1\n2,3,1\n3,2,1\n");
        try {
            net::load_network(nodes4, bad);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            CHECK(e.code == LoadErrc::disconnected);
        }
    }
    SECTION("parse failure") {
        const auto bad = write_temp("amod_links_parse.csv", "from,to,length_km\n0,1,abc\n");
        try {
            net::load_network(nodes, bad);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            CHECK(e.code == LoadErrc::parse);
        }
    }
}

TEST_CASE("floyd-warshall on hand-checked graphs", "[network]") {
    const auto g = triangle_graph();
    const auto m = net::all_pairs_shortest_paths(g);
    CHECK(m.dist(0, 2) == 2.0);  // A->B->C beats the direct 3.0 link
    for (int i = 0; i < 3; ++i) CHECK(m.dist(i, i) == 0.0);
    CHECK(net::shortest_path(m, 0, 2) == std::vector<int>{0, 1, 2});
    CHECK(net::shortest_path(m, 0, 0) == std::vector<int>{0});

    const auto grid = net::generate_grid_network(2, 2, 1.0);
    const auto gm = net::all_pairs_shortest_paths(grid);
    CHECK(gm.dist(0, 3) == 2.0);
    CHECK(net::shortest_path(gm, 0, 3).size() == 3);
}

TEST_CASE("floyd-warshall equals dijkstra exactly on random graphs", "[network]") {
    Rng rng(20240211);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 20 + static_cast<int>(rng.below(181));  // up to 200
        const auto g = oracles::random_strongly_connected_graph(n, 2.0, rng);
        const auto m = net::all_pairs_shortest_paths(g);
        for (int s = 0; s < n; ++s) {
            const auto d = oracles::dijkstra_from(g, s);
            for (int t = 0; t < n; ++t) {
                REQUIRE(m.dist(s, t) == d[t]);  // integer weights: exact equality
            }
        }
        // next_hop reconstruction reproduces the distances
        for (int s = 0; s < n; ++s) {
            for (int t = 0; t < n; ++t) {
                const auto path = m.path(s, t);
                REQUIRE(path.front() == s);
                REQUIRE(path.back() == t);
                double acc = 0.0;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) acc += m.dist(path[i], path[i + 1]);
                REQUIRE(std::abs(acc - m.dist(s, t)) < 1e-9);
            }
        }
    }
}

TEST_CASE("node limit guards the dense matrices", "[network]") {
    const auto g = net::generate_grid_network(3, 3, 1.0);
    CHECK_THROWS_AS(net::all_pairs_shortest_paths(g, 5), ConfigError);
}

TEST_CASE("k-means partitioning", "[network]") {
    SECTION("two separated clouds") {
        std::vector<net::Node> nodes;
        std::vector<net::Link> links;
        for (int i = 0; i < 6; ++i) nodes.push_back({i, (i < 3 ? 0.0 : 100.0) + i * 0.1, 0.0});
        for (int i = 0; i + 1 < 6; ++i) {
            links.push_back({i, i + 1, 1.0});
            links.push_back({i + 1, i, 1.0});
        }
        net::RoadGraph g(std::move(nodes), std::move(links));
        const auto p = net::kmeans_partition(g, 2, 3);
        CHECK(p.assignment[0] == p.assignment[1]);
        CHECK(p.assignment[1] == p.assignment[2]);
        CHECK(p.assignment[3] == p.assignment[4]);
        CHECK(p.assignment[4] == p.assignment[5]);
        CHECK(p.assignment[0] != p.assignment[3]);
    }
    SECTION("degenerate region counts") {
        const auto g = net::generate_grid_network(3, 3, 1.0);
        const auto one = net::kmeans_partition(g, 1, 1);
        for (int a : one.assignment) CHECK(a == 0);
        const auto all = net::kmeans_partition(g, 9, 1);
        std::vector<int> seen(9, 0);
        for (int a : all.assignment) ++seen[a];
        for (int c : seen) CHECK(c == 1);
        CHECK_THROWS_AS(net::kmeans_partition(g, 10, 1), ConfigError);
    }
    SECTION("determinism") {
        const auto g = net::generate_grid_network(8, 8, 0.5);
        const auto a = net::kmeans_partition(g, 5, 42);
        const auto b = net::kmeans_partition(g, 5, 42);
        CHECK(a.assignment == b.assignment);
        for (const auto& members : a.members) CHECK(!members.empty());
    }
}

TEST_CASE("demand density and regional marginals", "[network]") {
    const auto g = net::generate_grid_network(10, 10, 0.4);
    const auto dist = net::all_pairs_shortest_paths(g);
    const auto partition = net::kmeans_partition(g, 5, 7);

    SECTION("uniform density, equal regions") {
        std::vector<net::Node> nodes;
        std::vector<net::Link> links;
        for (int i = 0; i < 10; ++i) nodes.push_back({i, static_cast<double>(i), 0.0});
        for (int i = 0; i + 1 < 10; ++i) {
            links.push_back({i, i + 1, 1.0});
            links.push_back({i + 1, i, 1.0});
        }
        net::RoadGraph line(std::move(nodes), std::move(links));
        net::RegionPartition p;
        p.region_count = 5;
        p.assignment = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4};
        p.members = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {8, 9}};
        p.seeds.assign(5, {0.0, 0.0});
        const net::DemandDensity uniform(std::vector<double>(10, 0.1), p);
        const auto m = net::regional_marginals(uniform, p);
        for (double v : m) CHECK_THAT(v, Catch::Matchers::WithinAbs(0.2, 1e-12));
    }

    SECTION("mass point") {
        std::vector<double> phi(g.node_count(), 0.0);
        phi[17] = 5.0;  // normalized to 1
        const net::DemandDensity d(std::move(phi), partition);
        const auto m = net::regional_marginals(d, partition);
        double total = 0.0;
        for (double v : m) total += v;
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        CHECK_THAT(m[partition.region_of(17)], Catch::Matchers::WithinAbs(1.0, 1e-12));
    }

    SECTION("hotspot mixture reproduces the regional marginals") {
        const std::vector<double> mass{0.06, 0.35, 0.22, 0.29, 0.08};
        std::vector<int> hotspots;
        for (int r = 0; r < 5; ++r) hotspots.push_back(partition.members[r].front());
        const auto d = net::DemandDensity::hotspot_mixture(g, partition, dist, mass, hotspots, 0.8);
        const auto m = net::regional_marginals(d, partition);
        double total = 0.0;
        for (int r = 0; r < 5; ++r) {
            CHECK_THAT(m[r], Catch::Matchers::WithinAbs(mass[r], 1e-9));
            total += m[r];
        }
        CHECK_THAT(total, Catch::Matchers::WithinAbs(1.0, 1e-12));
        for (double v : d.values()) CHECK(v >= 0.0);
    }

    SECTION("seeded node sampling lands in the region") {
        const std::vector<double> mass{0.2, 0.2, 0.2, 0.2, 0.2};
        std::vector<int> hotspots;
        for (int r = 0; r < 5; ++r) hotspots.push_back(partition.members[r].front());
        const auto d = net::DemandDensity::hotspot_mixture(g, partition, dist, mass, hotspots, 0.8);
        Rng rng(5);
        for (int r = 0; r < 5; ++r)
            for (int k = 0; k < 50; ++k) CHECK(partition.region_of(d.sample_node_in_region(r, rng)) == r);
    }
}
