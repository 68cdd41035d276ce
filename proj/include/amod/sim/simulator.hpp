#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "amod/common/rng.hpp"
#include "amod/deepc/command.hpp"
#include "amod/net/density.hpp"
#include "amod/net/partition.hpp"
#include "amod/net/shortest_paths.hpp"
#include "amod/sim/types.hpp"

namespace amod::sim {

struct WindowMeasurement {
    Eigen::VectorXi e;   // empty vehicles per region at the boundary
    Eigen::VectorXi wO;  // requests issued during the window, by origin region
    Eigen::VectorXi wD;  // by destination region
    Eigen::VectorXi y;   // requests matched during the window, by origin region
};

// One seeded run's mutable state. Strictly single-threaded; all randomness
// comes through the rng streams handed to the mutating operations.
struct SimState {
    const net::RoadGraph* graph = nullptr;
    const net::DistanceMatrix* dist = nullptr;
    const net::RegionPartition* partition = nullptr;
    ScenarioConfig cfg;

    std::vector<Vehicle> vehicles;
    std::vector<Request> requests;  // issue-time order
    std::size_t next_inject = 0;
    std::vector<int> pool;  // pending request ids, issue order
    double now_s = 0.0;

    // within-window accumulators, reset by measure_window
    std::vector<int> win_origin, win_dest, win_matched;

    // transfer ratios of the current upper window; empty when no upper layer
    Eigen::MatrixXd theta;

    std::vector<int> newly_empty;  // dropoff completions since last drain

    int issued_count() const { return static_cast<int>(next_inject); }

    int region_count() const { return partition->region_count; }

    double link_length(int a, int b) const { return dist->dist(a, b); }

    // nearest node along the remaining path: the anchor until the link's
    // midpoint, the next node after it
    int effective_node(const Vehicle& v) const {
        if (!v.moving() || v.offset_km <= 0.0) return v.anchor_node();
        const double len = link_length(v.path[0], v.path[1]);
        return v.offset_km <= 0.5 * len ? v.path[0] : v.path[1];
    }

    int region_of_vehicle(const Vehicle& v) const { return partition->region_of(effective_node(v)); }
};

inline SimState make_state(const net::RoadGraph& graph, const net::DistanceMatrix& dist,
                           const net::RegionPartition& partition, const ScenarioConfig& cfg,
                           std::vector<Request> requests, Rng& placement_rng) {
    cfg.validate(partition.region_count);
    SimState s;
    s.graph = &graph;
    s.dist = &dist;
    s.partition = &partition;
    s.cfg = cfg;
    s.requests = std::move(requests);
    s.vehicles.resize(cfg.fleet_size);
    for (int i = 0; i < cfg.fleet_size; ++i) {
        s.vehicles[i].id = i;
        // initial placement: uniform over nodes
        s.vehicles[i].path = {static_cast<int>(placement_rng.below(graph.node_count()))};
    }
    s.win_origin.assign(partition.region_count, 0);
    s.win_dest.assign(partition.region_count, 0);
    s.win_matched.assign(partition.region_count, 0);
    return s;
}

// Install the path from the vehicle's position to target. A vehicle part-way
// along a link must finish that link first; one standing on a node is free.
inline void route_to(SimState& s, Vehicle& v, int target) {
    if (!v.moving() || v.offset_km <= 0.0) {
        v.path = s.dist->path(v.anchor_node(), target);
        v.offset_km = 0.0;
        return;
    }
    const int head = v.path[0];
    std::vector<int> rest = s.dist->path(v.path[1], target);
    v.path.assign(1, head);
    v.path.insert(v.path.end(), rest.begin(), rest.end());
}

inline double eta_to_s(const SimState& s, const Vehicle& v, int target) {
    const double speed = s.cfg.speed_kms();
    if (!v.moving() || v.offset_km <= 0.0) return s.dist->dist(v.anchor_node(), target) / speed;
    const double to_next = s.link_length(v.path[0], v.path[1]) - v.offset_km;
    return (to_next + s.dist->dist(v.path[1], target)) / speed;
}

// Move every vehicle by speed * dt along its path, firing pickup, dropoff and
// relocation arrivals in travel order. Event timestamps are exact within the
// tick. Odometers: service kilometers while to_pickup/occupied, rebalancing
// kilometers otherwise.
inline void advance(SimState& s, double dt) {
    const double speed = s.cfg.speed_kms();
    for (auto& v : s.vehicles) {
        double remaining = speed * dt;
        double t_local = s.now_s;
        while (remaining > 1e-12 && v.moving()) {
            const double len = s.link_length(v.path[0], v.path[1]);
            const double step = std::min(remaining, len - v.offset_km);
            const bool busy = v.status == VehicleStatus::to_pickup || v.status == VehicleStatus::occupied;
            if (busy) {
                v.odometer_service_km += step;
                v.busy_time_s += step / speed;
            } else {
                v.odometer_rebalance_km += step;
            }
            v.offset_km += step;
            remaining -= step;
            t_local += step / speed;
            if (v.offset_km >= len - 1e-12) {
                v.path.erase(v.path.begin());
                v.offset_km = 0.0;
                if (v.moving()) continue;
                // arrived at the path's final node
                const int here = v.anchor_node();
                if (v.status == VehicleStatus::to_pickup) {
                    Request& r = s.requests[*v.request_id];
                    r.t_pickup_s = t_local;
                    v.status = VehicleStatus::occupied;
                    route_to(s, v, r.destination);  // keeps moving within this tick
                } else if (v.status == VehicleStatus::occupied) {
                    Request& r = s.requests[*v.request_id];
                    r.status = RequestStatus::completed;
                    r.t_dropoff_s = t_local;
                    (void)here;
                    v.request_id.reset();
                    v.status = VehicleStatus::idle;
                    s.newly_empty.push_back(v.id);
                } else {
                    // relocation or coverage arrival
                    v.status = VehicleStatus::idle;
                }
            }
        }
    }
    s.now_s += dt;
}

// Requests whose issue time has passed enter the matching pool and the
// window's origin/destination counts.
inline void inject_requests(SimState& s) {
    while (s.next_inject < s.requests.size() && s.requests[s.next_inject].t_issue_s <= s.now_s + 1e-9) {
        const Request& r = s.requests[s.next_inject];
        s.pool.push_back(r.id);
        ++s.win_origin[s.partition->region_of(r.origin)];
        ++s.win_dest[s.partition->region_of(r.destination)];
        ++s.next_inject;
    }
}

// Greedy matching in issue order: the empty vehicle with the shortest ETA is
// assigned iff request age + ETA fits inside T_w. Requests older than T_m are
// cancelled. One pass per tick; a vehicle serves at most one request.
inline void match_requests(SimState& s) {
    std::vector<int> candidates;
    for (const auto& v : s.vehicles)
        if (is_empty_status(v.status) && !v.request_id) candidates.push_back(v.id);

    std::vector<int> still_pending;
    for (int rid : s.pool) {
        Request& r = s.requests[rid];
        const double age = s.now_s - r.t_issue_s;
        if (age > s.cfg.T_m_s + 1e-9) {
            r.status = RequestStatus::cancelled;
            continue;
        }
        double best_eta = std::numeric_limits<double>::infinity();
        int best = -1;
        std::size_t best_pos = 0;
        for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
            const Vehicle& v = s.vehicles[candidates[ci]];
            const double eta = eta_to_s(s, v, r.origin);
            if (eta < best_eta) {  // candidates are in id order, ties keep the lower id
                best_eta = eta;
                best = candidates[ci];
                best_pos = ci;
            }
        }
        if (best >= 0 && age + best_eta <= s.cfg.T_w_s + 1e-9) {
            Vehicle& v = s.vehicles[best];
            r.status = RequestStatus::matched;
            r.t_matched_s = s.now_s;
            v.request_id = r.id;
            v.status = VehicleStatus::to_pickup;
            route_to(s, v, r.origin);
            ++s.win_matched[s.partition->region_of(r.origin)];
            if (!v.moving()) {
                // already standing on the origin node
                r.t_pickup_s = s.now_s;
                v.status = VehicleStatus::occupied;
                route_to(s, v, r.destination);
            }
            candidates.erase(candidates.begin() + best_pos);
        } else {
            still_pending.push_back(rid);
        }
    }
    s.pool = std::move(still_pending);
}

inline Eigen::VectorXi empty_counts(const SimState& s) {
    Eigen::VectorXi e = Eigen::VectorXi::Zero(s.region_count());
    for (const auto& v : s.vehicles)
        if (is_empty_status(v.status) && !v.request_id) ++e(s.region_of_vehicle(v));
    return e;
}

// Boundary measurement: current empty counts plus the elapsed window's issue
// and match counts. Resets the window accumulators.
inline WindowMeasurement measure_window(SimState& s) {
    WindowMeasurement m;
    m.e = empty_counts(s);
    const int R = s.region_count();
    m.wO.resize(R);
    m.wD.resize(R);
    m.y.resize(R);
    for (int r = 0; r < R; ++r) {
        m.wO(r) = s.win_origin[r];
        m.wD(r) = s.win_dest[r];
        m.y(r) = s.win_matched[r];
    }
    std::fill(s.win_origin.begin(), s.win_origin.end(), 0);
    std::fill(s.win_dest.begin(), s.win_dest.end(), 0);
    std::fill(s.win_matched.begin(), s.win_matched.end(), 0);
    return m;
}

// nearest node of a region from a source node, ties to the lower node id
inline int nearest_node_in_region(const SimState& s, int from, int region) {
    double best = std::numeric_limits<double>::infinity();
    int best_node = -1;
    for (int q : s.partition->members[region]) {
        const double d = s.dist->dist(from, q);
        if (d < best) {
            best = d;
            best_node = q;
        }
    }
    return best_node;
}

inline void send_to_region(SimState& s, Vehicle& v, int region) {
    v.status = VehicleStatus::relocating;
    route_to(s, v, nearest_node_in_region(s, v.reroute_node(), region));
}

struct UpperApplyStats {
    int relocated = 0;
    int shortfall = 0;  // commanded transfers that found no vehicle
};

// Boundary application of an upper-layer command: u_int(I,J) empty vehicles of
// region I, picked uniformly at random, relocate toward the nearest node of
// region J; the remainder stays (relocating survivors become idle). theta is
// stored for the window's newly-empty redistribution.
inline UpperApplyStats apply_upper_command(SimState& s, const deepc::ControlCommand& cmd, Rng& policy_rng) {
    const int R = s.region_count();
    UpperApplyStats stats;
    std::vector<std::vector<int>> empties(R);
    for (const auto& v : s.vehicles)
        if (is_empty_status(v.status) && !v.request_id) empties[s.region_of_vehicle(v)].push_back(v.id);

    for (int i = 0; i < R; ++i) {
        auto& list = empties[i];
        policy_rng.shuffle(list);
        std::size_t cursor = 0;
        for (int j = 0; j < R; ++j) {
            if (j == i) continue;
            for (int k = 0; k < cmd.u_int(i, j); ++k) {
                if (cursor >= list.size()) {
                    ++stats.shortfall;
                    continue;
                }
                send_to_region(s, s.vehicles[list[cursor++]], j);
                ++stats.relocated;
            }
        }
        for (; cursor < list.size(); ++cursor) {
            Vehicle& v = s.vehicles[list[cursor]];
            if (v.status == VehicleStatus::relocating) {
                // told to stay: stop at the end of the current link
                v.status = VehicleStatus::idle;
                if (v.moving() && v.offset_km > 0.0)
                    v.path.assign({v.path[0], v.path[1]});
                else
                    v.path.assign(1, v.anchor_node());
            }
        }
    }
    s.theta = cmd.theta;
    return stats;
}

// Mid-window redistribution: a vehicle that just became empty in region I
// relocates to region J with probability theta(I, J); J == I stays and is
// left to the lower layer.
inline void redistribute_newly_empty(SimState& s, Rng& policy_rng) {
    if (s.theta.size() == 0) {
        s.newly_empty.clear();
        return;
    }
    for (int vid : s.newly_empty) {
        Vehicle& v = s.vehicles[vid];
        if (v.status != VehicleStatus::idle || v.request_id) continue;  // matched again already
        const int region = s.region_of_vehicle(v);
        std::vector<double> row(s.region_count());
        for (int j = 0; j < s.region_count(); ++j) row[j] = s.theta(region, j);
        const int dest_region = policy_rng.categorical(row);
        if (dest_region != region) send_to_region(s, v, dest_region);
    }
    s.newly_empty.clear();
}

// Lower-layer targets for idle vehicles; kilometers driven on these paths
// count as rebalancing.
inline void apply_lower_targets(SimState& s, const std::map<int, int>& targets) {
    for (const auto& [vid, node] : targets) {
        Vehicle& v = s.vehicles[vid];
        if (v.status != VehicleStatus::idle) continue;
        route_to(s, v, node);
    }
}

inline MetricsReport compute_metrics(const SimState& s) {
    MetricsReport m;
    m.issued = s.issued_count();
    if (m.issued == 0) throw RuntimeError("metrics: no requests issued, answer rate undefined");
    m.per_region.assign(s.region_count(), {});
    double wait_sum = 0.0;
    int wait_count = 0;
    for (std::size_t i = 0; i < s.next_inject; ++i) {
        const Request& r = s.requests[i];
        auto& reg = m.per_region[s.partition->region_of(r.origin)];
        ++reg.issued;
        if (r.answered()) {
            ++m.answered;
            ++reg.answered;
        } else if (r.status == RequestStatus::cancelled) {
            ++m.cancelled;
            ++reg.cancelled;
        }
        if (r.t_pickup_s) {
            wait_sum += *r.t_pickup_s - r.t_issue_s;
            ++wait_count;
        }
    }
    m.pending = m.issued - m.answered - m.cancelled;
    m.answer_rate = static_cast<double>(m.answered) / static_cast<double>(m.issued);
    m.avg_wait_s = wait_count > 0 ? wait_sum / wait_count : 0.0;
    double busy = 0.0;
    for (const auto& v : s.vehicles) {
        m.rebalance_km += v.odometer_rebalance_km;
        busy += v.busy_time_s;
    }
    m.vur = busy / (static_cast<double>(s.cfg.fleet_size) * s.cfg.sim_duration_s);
    return m;
}

}  // namespace amod::sim
