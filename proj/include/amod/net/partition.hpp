#pragma once

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "amod/common/csv.hpp"
#include "amod/common/rng.hpp"
#include "amod/net/graph.hpp"

namespace amod::net {

struct RegionPartition {
    int region_count = 0;
    std::vector<int> assignment;                    // node id -> region id
    std::vector<std::pair<double, double>> seeds;   // final centroid coordinates
    std::vector<std::vector<int>> members;          // region id -> sorted node ids

    int region_of(int node) const { return assignment[static_cast<std::size_t>(node)]; }

    void save(const std::string& path) const {
        std::ostringstream os;
        os << "node_id,region_id\n";
        for (std::size_t i = 0; i < assignment.size(); ++i) os << i << "," << assignment[i] << "\n";
        write_file_atomic(path, os.str());
    }
};

// Lloyd's algorithm on node coordinates. Deterministic for a given seed:
// seeded Forgy init, ties to the lower region index, empty clusters re-seeded
// with the node farthest from its current centroid.
inline RegionPartition kmeans_partition(const RoadGraph& g, int region_count, std::uint64_t seed) {
    const int n = g.node_count();
    if (region_count < 1) throw ConfigError("region count must be >= 1");
    if (region_count > n)
        throw ConfigError("region count " + std::to_string(region_count) + " exceeds node count " + std::to_string(n));

    Rng rng(seed);
    std::vector<std::pair<double, double>> centers(region_count);
    {
        auto init = rng.sample_distinct(n, region_count);
        for (int r = 0; r < region_count; ++r) centers[r] = {g.node(init[r]).x, g.node(init[r]).y};
    }

    auto sq = [](double v) { return v * v; };
    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 100; ++iter) {
        std::vector<int> next(n);
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_r = 0;
            for (int r = 0; r < region_count; ++r) {
                const double d = sq(g.node(i).x - centers[r].first) + sq(g.node(i).y - centers[r].second);
                if (d < best) {
                    best = d;
                    best_r = r;
                }
            }
            next[i] = best_r;
        }

        std::vector<int> count(region_count, 0);
        for (int i = 0; i < n; ++i) ++count[next[i]];
        for (int r = 0; r < region_count; ++r) {
            if (count[r] > 0) continue;
            // farthest node from its assigned centroid takes over the empty region
            double far = -1.0;
            int far_node = -1;
            for (int i = 0; i < n; ++i) {
                if (count[next[i]] <= 1) continue;  // do not empty another region
                const double d =
                    sq(g.node(i).x - centers[next[i]].first) + sq(g.node(i).y - centers[next[i]].second);
                if (d > far) {
                    far = d;
                    far_node = i;
                }
            }
            if (far_node >= 0) {
                --count[next[far_node]];
                next[far_node] = r;
                ++count[r];
            }
        }

        bool changed = (next != assign);
        assign = std::move(next);
        for (int r = 0; r < region_count; ++r) {
            double sx = 0.0, sy = 0.0;
            int c = 0;
            for (int i = 0; i < n; ++i) {
                if (assign[i] == r) {
                    sx += g.node(i).x;
                    sy += g.node(i).y;
                    ++c;
                }
            }
            if (c > 0) centers[r] = {sx / c, sy / c};
        }
        if (!changed) break;
    }

    RegionPartition p;
    p.region_count = region_count;
    p.assignment = std::move(assign);
    p.seeds = std::move(centers);
    p.members.assign(region_count, {});
    for (int i = 0; i < n; ++i) p.members[p.assignment[i]].push_back(i);
    for (auto& m : p.members)
        if (m.empty()) throw RuntimeError("k-means produced an empty region");
    return p;
}

}  // namespace amod::net
