#pragma once

// Per-source Dijkstra used as the independent oracle for the Floyd-Warshall
// distance matrix.

#include <limits>
#include <queue>
#include <vector>

#include "amod/net/graph.hpp"

namespace oracles {

inline std::vector<double> dijkstra_from(const amod::net::RoadGraph& g, int source) {
    const int n = g.node_count();
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[source] = 0.0;
    heap.push({0.0, source});
    while (!heap.empty()) {
        auto [d, v] = heap.top();
        heap.pop();
        if (d > dist[v]) continue;
        for (int li : g.out_links(v)) {
            const auto& link = g.links()[li];
            const double nd = d + link.length_km;
            if (nd < dist[link.to]) {
                dist[link.to] = nd;
                heap.push({nd, link.to});
            }
        }
    }
    return dist;
}

}  // namespace oracles
