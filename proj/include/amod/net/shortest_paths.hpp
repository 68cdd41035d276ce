#pragma once

#include <limits>
#include <vector>

#include "amod/net/graph.hpp"

namespace amod::net {

// All-pairs shortest paths with successor table for path reconstruction.
// Dense storage; intended for networks up to a few thousand nodes.
class DistanceMatrix {
  public:
    static constexpr int kDefaultNodeLimit = 2000;

    DistanceMatrix() = default;

    double dist(int a, int b) const { return dist_[static_cast<std::size_t>(a) * n_ + b]; }
    int next_hop(int a, int b) const { return next_[static_cast<std::size_t>(a) * n_ + b]; }
    int node_count() const { return n_; }

    // node sequence from a to b following next_hop; [a] when a == b
    std::vector<int> path(int a, int b) const {
        std::vector<int> p{a};
        int cur = a;
        while (cur != b) {
            cur = next_hop(cur, b);
            p.push_back(cur);
        }
        return p;
    }

    static DistanceMatrix floyd_warshall(const RoadGraph& g, int node_limit = kDefaultNodeLimit) {
        const int n = g.node_count();
        if (n > node_limit)
            throw ConfigError("network has " + std::to_string(n) + " nodes, above the dense-matrix limit of " +
                              std::to_string(node_limit));
        DistanceMatrix m;
        m.n_ = n;
        const double inf = std::numeric_limits<double>::infinity();
        m.dist_.assign(static_cast<std::size_t>(n) * n, inf);
        m.next_.assign(static_cast<std::size_t>(n) * n, -1);
        for (int i = 0; i < n; ++i) {
            m.dist_[static_cast<std::size_t>(i) * n + i] = 0.0;
            m.next_[static_cast<std::size_t>(i) * n + i] = i;
        }
        for (const auto& l : g.links()) {
            auto& d = m.dist_[static_cast<std::size_t>(l.from) * n + l.to];
            if (l.length_km < d) {  // parallel links keep the shortest
                d = l.length_km;
                m.next_[static_cast<std::size_t>(l.from) * n + l.to] = l.to;
            }
        }
        for (int k = 0; k < n; ++k) {
            const double* dk = &m.dist_[static_cast<std::size_t>(k) * n];
            for (int i = 0; i < n; ++i) {
                const double dik = m.dist_[static_cast<std::size_t>(i) * n + k];
                if (dik == inf) continue;
                double* di = &m.dist_[static_cast<std::size_t>(i) * n];
                int* ni = &m.next_[static_cast<std::size_t>(i) * n];
                const int nik = ni[k];
                for (int j = 0; j < n; ++j) {
                    const double via = dik + dk[j];
                    if (via < di[j]) {
                        di[j] = via;
                        ni[j] = nik;
                    }
                }
            }
        }
        return m;
    }

  private:
    int n_ = 0;
    std::vector<double> dist_;
    std::vector<int> next_;
};

inline DistanceMatrix all_pairs_shortest_paths(const RoadGraph& g,
                                               int node_limit = DistanceMatrix::kDefaultNodeLimit) {
    return DistanceMatrix::floyd_warshall(g, node_limit);
}

inline std::vector<int> shortest_path(const DistanceMatrix& m, int a, int b) { return m.path(a, b); }

}  // namespace amod::net
