#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "amod/common/csv.hpp"
#include "amod/common/rng.hpp"
#include "amod/net/density.hpp"
#include "amod/sim/types.hpp"

namespace amod::sim {

// Poisson request stream: exponential inter-arrival times, origin region from
// phi_origin, destination region from phi_dest (independent), nodes from the
// demand density restricted to the region. The destination node is resampled
// on collision with the origin node.
inline std::vector<Request> generate_requests(const ScenarioConfig& cfg, const net::RegionPartition& partition,
                                               const net::DemandDensity& density, Rng& rng) {
    cfg.validate(partition.region_count);
    std::vector<Request> out;
    if (cfg.request_rate_per_s <= 0.0) return out;
    double t = rng.exponential(cfg.request_rate_per_s);
    int id = 0;
    while (t < cfg.sim_duration_s) {
        const int origin_region = rng.categorical(cfg.phi_origin);
        const int dest_region = rng.categorical(cfg.phi_dest);
        const int origin = density.sample_node_in_region(origin_region, rng);
        int dest = density.sample_node_in_region(dest_region, rng);
        for (int tries = 0; dest == origin && tries < 64; ++tries)
            dest = density.sample_node_in_region(dest_region, rng);
        if (dest == origin) {
            // degenerate region; pick any other node deterministically
            for (int q = 0; q < static_cast<int>(partition.assignment.size()); ++q) {
                if (q != origin) {
                    dest = q;
                    break;
                }
            }
        }
        Request r;
        r.id = id++;
        r.t_issue_s = t;
        r.origin = origin;
        r.destination = dest;
        out.push_back(r);
        t += rng.exponential(cfg.request_rate_per_s);
    }
    return out;
}

inline void save_request_trace(const std::vector<Request>& requests, const std::string& path) {
    std::ostringstream os;
    os << "id,t_issue_s,origin_node,dest_node\n";
    for (const auto& r : requests)
        os << r.id << "," << fmt_double(r.t_issue_s, 3) << "," << r.origin << "," << r.destination << "\n";
    write_file_atomic(path, os.str());
}

inline std::vector<Request> load_request_trace(const std::string& path, int node_count) {
    CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"id", "t_issue_s", "origin_node", "dest_node"})
        throw LoadError(LoadErrc::parse, path + ": expected header id,t_issue_s,origin_node,dest_node");
    std::vector<Request> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) {
        Request r;
        r.id = static_cast<int>(csv_long(row[0], path));
        r.t_issue_s = csv_double(row[1], path);
        r.origin = static_cast<int>(csv_long(row[2], path));
        r.destination = static_cast<int>(csv_long(row[3], path));
        if (r.origin < 0 || r.origin >= node_count || r.destination < 0 || r.destination >= node_count)
            throw LoadError(LoadErrc::dangling_endpoint, path + ": request node out of range");
        if (r.origin == r.destination) throw LoadError(LoadErrc::parse, path + ": origin equals destination");
        out.push_back(r);
    }
    std::sort(out.begin(), out.end(), [](const Request& a, const Request& b) {
        return a.t_issue_s < b.t_issue_s || (a.t_issue_s == b.t_issue_s && a.id < b.id);
    });
    return out;
}

}  // namespace amod::sim
