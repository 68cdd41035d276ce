#pragma once

#include <limits>
#include <map>
#include <vector>

#include "amod/common/error.hpp"
#include "amod/net/density.hpp"
#include "amod/net/shortest_paths.hpp"

namespace amod::cov {

// Nodes within r of the owner and closer to it than to any other vehicle
// (distance ties to the lower vehicle id).
struct VoronoiCell {
    int owner = -1;       // vehicle id
    int owner_node = -1;  // vehicle's current nearest node
    std::vector<int> nodes;
};

struct CoverageConfig {
    double radius_km = 1.5;

    void validate() const {
        if (!(radius_km > 0.0)) throw ConfigError("coverage: radius must be positive");
    }
};

struct VehicleAtNode {
    int vehicle_id;
    int node;
};

// r-limited graph Voronoi partition over the scoped nodes. Cells are pairwise
// disjoint; nodes farther than r from every vehicle stay unassigned.
inline std::map<int, VoronoiCell> graph_voronoi(const net::DistanceMatrix& dist,
                                                const std::vector<VehicleAtNode>& vehicles, double r,
                                                const std::vector<int>& scope) {
    std::map<int, VoronoiCell> cells;
    for (const auto& v : vehicles) cells[v.vehicle_id] = VoronoiCell{v.vehicle_id, v.node, {}};
    for (int q : scope) {
        double best = std::numeric_limits<double>::infinity();
        int best_vehicle = -1;
        for (const auto& v : vehicles) {
            const double d = dist.dist(v.node, q);
            if (d < best || (d == best && best_vehicle >= 0 && v.vehicle_id < best_vehicle)) {
                best = d;
                best_vehicle = v.vehicle_id;
            }
        }
        if (best_vehicle >= 0 && best <= r) cells[best_vehicle].nodes.push_back(q);
    }
    return cells;
}

// Demand-weighted 1-median of the cell over its own nodes; ties to the lower
// node id. The search stays inside the cell, which keeps the target in the
// vehicle's territory and gives the Lloyd iteration its descent property.
inline int cell_centroid(const VoronoiCell& cell, const net::DemandDensity& phi, const net::DistanceMatrix& dist) {
    if (cell.nodes.empty()) throw ConfigError("coverage: centroid of an empty cell");
    double best = std::numeric_limits<double>::infinity();
    int best_node = -1;
    for (int cand : cell.nodes) {
        double cost = 0.0;
        for (int q : cell.nodes) cost += phi.phi(q) * dist.dist(cand, q);
        if (cost < best || (cost == best && cand < best_node)) {
            best = cost;
            best_node = cand;
        }
    }
    return best_node;
}

// One lower-layer step: partition, then send each vehicle to its cell's
// centroid. A vehicle with an empty cell (its node captured by a lower-id
// vehicle at the same spot) holds position.
inline std::map<int, int> coverage_step(const std::vector<VehicleAtNode>& idle_vehicles,
                                        const net::DistanceMatrix& dist, const net::DemandDensity& phi,
                                        const CoverageConfig& config, const std::vector<int>& scope) {
    config.validate();
    std::map<int, int> targets;
    if (idle_vehicles.empty()) return targets;
    const auto cells = graph_voronoi(dist, idle_vehicles, config.radius_km, scope);
    for (const auto& v : idle_vehicles) {
        const auto& cell = cells.at(v.vehicle_id);
        targets[v.vehicle_id] = cell.nodes.empty() ? v.node : cell_centroid(cell, phi, dist);
    }
    return targets;
}

// Diagnostic coverage functional: expected capped distance from a demand node
// to its nearest vehicle. Uncovered nodes contribute the cap r.
inline double coverage_objective(const std::vector<VehicleAtNode>& vehicles, const net::DemandDensity& phi,
                                 const net::DistanceMatrix& dist, double r, const std::vector<int>& scope) {
    if (scope.empty()) throw ConfigError("coverage: objective needs a non-empty scope");
    double total = 0.0;
    for (int q : scope) {
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& v : vehicles) nearest = std::min(nearest, dist.dist(v.node, q));
        total += phi.phi(q) * std::min(nearest, r);
    }
    return total;
}

}  // namespace amod::cov
