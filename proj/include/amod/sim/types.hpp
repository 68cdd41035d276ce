#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amod/common/error.hpp"

namespace amod::sim {

enum class VehicleStatus { idle, relocating, to_pickup, occupied };

inline const char* to_string(VehicleStatus s) {
    switch (s) {
        case VehicleStatus::idle: return "idle";
        case VehicleStatus::relocating: return "relocating";
        case VehicleStatus::to_pickup: return "to_pickup";
        case VehicleStatus::occupied: return "occupied";
    }
    return "?";
}

// idle or relocating; both serve as matching candidates
inline bool is_empty_status(VehicleStatus s) { return s == VehicleStatus::idle || s == VehicleStatus::relocating; }

struct Vehicle {
    int id = -1;
    VehicleStatus status = VehicleStatus::idle;

    // path[0] is the anchor node last touched; offset_km is progress on the
    // link path[0] -> path[1]. size() == 1 means stationary at path[0].
    std::vector<int> path;
    double offset_km = 0.0;

    std::optional<int> request_id;
    double odometer_rebalance_km = 0.0;
    double odometer_service_km = 0.0;
    double busy_time_s = 0.0;

    bool moving() const { return path.size() >= 2; }
    int anchor_node() const { return path.front(); }
    // reroutes must pass through the link currently being traversed
    int reroute_node() const { return offset_km > 0.0 && moving() ? path[1] : path.front(); }
};

enum class RequestStatus { pending, matched, cancelled, completed };

struct Request {
    int id = -1;
    double t_issue_s = 0.0;
    int origin = -1;
    int destination = -1;
    RequestStatus status = RequestStatus::pending;
    std::optional<double> t_matched_s;
    std::optional<double> t_pickup_s;
    std::optional<double> t_dropoff_s;

    bool answered() const { return status == RequestStatus::matched || status == RequestStatus::completed; }
};

struct ScenarioConfig {
    int fleet_size = 60;
    double sim_duration_s = 10800.0;
    double request_rate_per_s = 0.1;           // Poisson arrival rate
    std::vector<double> phi_origin;            // regional trip origin probabilities
    std::vector<double> phi_dest;              // regional trip destination probabilities
    double speed_kmh = 30.0;
    double T_l_s = 30.0;                       // lower-layer step
    double T_u_s = 600.0;                      // upper-layer step
    double T_m_s = 60.0;                       // matching-pool lifetime
    double T_w_s = 240.0;                      // pickup reachability threshold

    double speed_kms() const { return speed_kmh / 3600.0; }

    void validate(int regions) const {
        if (fleet_size < 1) throw ConfigError("scenario: fleet size must be >= 1");
        if (!(sim_duration_s > 0.0)) throw ConfigError("scenario: duration must be positive");
        if (request_rate_per_s < 0.0) throw ConfigError("scenario: request rate must be >= 0");
        if (!(speed_kmh > 0.0)) throw ConfigError("scenario: speed must be positive");
        if (!(T_l_s > 0.0) || !(T_u_s > 0.0) || !(T_m_s > 0.0) || !(T_w_s > 0.0))
            throw ConfigError("scenario: all durations must be positive");
        const double ratio = T_u_s / T_l_s;
        if (std::abs(ratio - std::round(ratio)) > 1e-9)
            throw ConfigError("scenario: T_u must be a multiple of T_l");
        auto check_dist = [&](const std::vector<double>& v, const char* name) {
            if (static_cast<int>(v.size()) != regions)
                throw ConfigError(std::string("scenario: ") + name + " must have one entry per region");
            double s = 0.0;
            for (double x : v) {
                if (x < 0.0) throw ConfigError(std::string("scenario: ") + name + " entries must be >= 0");
                s += x;
            }
            if (std::abs(s - 1.0) > 1e-6) throw ConfigError(std::string("scenario: ") + name + " must sum to 1");
        };
        check_dist(phi_origin, "phi_origin");
        check_dist(phi_dest, "phi_dest");
    }
};

struct RegionBreakdown {
    int issued = 0;
    int answered = 0;
    int cancelled = 0;
};

struct MetricsReport {
    double answer_rate = 0.0;
    double avg_wait_s = 0.0;
    double rebalance_km = 0.0;
    double vur = 0.0;
    int issued = 0;
    int answered = 0;
    int cancelled = 0;
    int pending = 0;
    std::vector<RegionBreakdown> per_region;
};

struct TimeSeriesRow {
    double t_s;
    int region;
    int empty_vehicles;
};

}  // namespace amod::sim
