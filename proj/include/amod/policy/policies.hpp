#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "amod/common/rng.hpp"
#include "amod/cov/coverage.hpp"
#include "amod/deepc/command.hpp"
#include "amod/deepc/controller.hpp"
#include "amod/deepc/forecast.hpp"
#include "amod/policy/hungarian.hpp"
#include "amod/sim/requests.hpp"
#include "amod/sim/simulator.hpp"

namespace amod::policy {

enum class PolicyKind { no_control, lower_only, upper_only, hierarchical, lp_rebalance, random_collect };

inline const char* to_string(PolicyKind k) {
    switch (k) {
        case PolicyKind::no_control: return "no_control";
        case PolicyKind::lower_only: return "lower_only";
        case PolicyKind::upper_only: return "upper_only";
        case PolicyKind::hierarchical: return "hierarchical";
        case PolicyKind::lp_rebalance: return "lp";
        case PolicyKind::random_collect: return "collect";
    }
    return "?";
}

inline PolicyKind policy_from_string(const std::string& s) {
    if (s == "no_control") return PolicyKind::no_control;
    if (s == "lower_only") return PolicyKind::lower_only;
    if (s == "upper_only") return PolicyKind::upper_only;
    if (s == "hierarchical") return PolicyKind::hierarchical;
    if (s == "lp") return PolicyKind::lp_rebalance;
    if (s == "collect") return PolicyKind::random_collect;
    throw ConfigError("unknown policy: " + s);
}

// Immutable world shared by every run of a scenario.
struct World {
    const net::RoadGraph* graph = nullptr;
    const net::DistanceMatrix* dist = nullptr;
    const net::RegionPartition* partition = nullptr;
    const net::DemandDensity* density = nullptr;
};

// Per-run policy state. The controller is present iff the upper layer is
// active; the coverage config is used iff the lower layer is active.
struct PolicyContext {
    PolicyKind kind = PolicyKind::no_control;
    cov::CoverageConfig coverage;
    double lp_period_s = 30.0;
    double forecast_sigma2 = 0.0;
    bool lower_enabled = true;  // switch for the composition check; production runs leave it on
    bool dump_coverage = false;

    std::optional<deepc::DeepcController> controller;

    bool has_upper() const { return kind == PolicyKind::upper_only || kind == PolicyKind::hierarchical; }
    bool has_lower() const {
        return lower_enabled && (kind == PolicyKind::lower_only || kind == PolicyKind::hierarchical ||
                                 kind == PolicyKind::random_collect);
    }

    void validate() const {
        if (has_upper() && !controller) throw ConfigError("policy: upper layer requires a deepc controller");
        if (!has_upper() && controller) throw ConfigError("policy: controller present without an upper layer");
        if (has_lower()) coverage.validate();
        if (kind == PolicyKind::lp_rebalance && !(lp_period_s > 0.0))
            throw ConfigError("policy: lp period must be positive");
    }
};

// One (u, w, y) sample of an upper-layer window, as recorded during data
// collection: commanded integer transfers, measured demand marginals and
// answered counts.
struct CollectedRecord {
    Eigen::VectorXd u, w, y;
};

struct CoverageDumpRow {
    int step;
    int vehicle_id;
    int node_id;
    int cell_size;
    int centroid_node;
    double objective;
};

struct RunResult {
    sim::MetricsReport metrics;
    std::vector<sim::TimeSeriesRow> series;
    std::vector<deepc::SolveLogEntry> deepc_log;
    std::vector<CollectedRecord> collected;
    std::vector<Eigen::MatrixXi> applied_commands;  // u_int per upper window
    std::vector<CoverageDumpRow> coverage_dump;
    int upper_shortfall = 0;
    int deepc_fallbacks = 0;
};

namespace detail {

// Ground-truth demand OD matrix per upper window, from the request list.
inline std::vector<Eigen::MatrixXd> demand_truth_by_window(const std::vector<sim::Request>& requests,
                                                           const net::RegionPartition& partition, double T_u,
                                                           double duration) {
    const int R = partition.region_count;
    const int windows = static_cast<int>(std::ceil(duration / T_u - 1e-9));
    std::vector<Eigen::MatrixXd> truth(windows, Eigen::MatrixXd::Zero(R, R));
    for (const auto& r : requests) {
        if (r.t_issue_s >= duration) break;
        const int k = std::min(windows - 1, static_cast<int>(r.t_issue_s / T_u));
        truth[k](partition.region_of(r.origin), partition.region_of(r.destination)) += 1.0;
    }
    return truth;
}

inline void lower_layer_tick(const World& w, sim::SimState& st, PolicyContext& pol, int tick, RunResult& out) {
    const int R = st.region_count();
    std::vector<std::vector<cov::VehicleAtNode>> idle_by_region(R);
    for (const auto& v : st.vehicles)
        if (v.status == sim::VehicleStatus::idle && !v.request_id)
            idle_by_region[st.region_of_vehicle(v)].push_back({v.id, st.effective_node(v)});

    std::map<int, int> targets;
    for (int r = 0; r < R; ++r) {
        if (idle_by_region[r].empty()) continue;
        const auto& scope = w.partition->members[r];
        auto region_targets = cov::coverage_step(idle_by_region[r], *w.dist, *w.density, pol.coverage, scope);
        if (pol.dump_coverage) {
            const auto cells = cov::graph_voronoi(*w.dist, idle_by_region[r], pol.coverage.radius_km, scope);
            const double obj =
                cov::coverage_objective(idle_by_region[r], *w.density, *w.dist, pol.coverage.radius_km, scope);
            for (const auto& v : idle_by_region[r]) {
                out.coverage_dump.push_back({tick, v.vehicle_id, v.node,
                                             static_cast<int>(cells.at(v.vehicle_id).nodes.size()),
                                             region_targets.at(v.vehicle_id), obj});
            }
        }
        targets.merge(region_targets);
    }
    sim::apply_lower_targets(st, targets);
}

inline void lp_rebalance_tick(sim::SimState& st) {
    std::vector<int> idle;
    for (const auto& v : st.vehicles)
        if (v.status == sim::VehicleStatus::idle && !v.request_id) idle.push_back(v.id);
    const std::vector<int>& pending = st.pool;
    if (idle.empty() || pending.empty()) return;

    Eigen::MatrixXd cost(idle.size(), pending.size());
    for (std::size_t i = 0; i < idle.size(); ++i)
        for (std::size_t j = 0; j < pending.size(); ++j)
            cost(i, j) = sim::eta_to_s(st, st.vehicles[idle[i]], st.requests[pending[j]].origin);

    const auto assignment = solve_rectangular_assignment(cost);
    for (std::size_t i = 0; i < idle.size(); ++i) {
        if (assignment[i] < 0) continue;
        sim::Vehicle& v = st.vehicles[idle[i]];
        // dispatched toward the origin as a relocation; matching stays with
        // the standard T_w rule
        v.status = sim::VehicleStatus::relocating;
        sim::route_to(st, v, st.requests[pending[assignment[i]]].origin);
    }
}

}  // namespace detail

// Runs one seeded simulation under the given policy. Tick order: vehicle
// movement and arrivals, theta redistribution of newly empty vehicles,
// request injection, upper command on window boundaries, matching, lower
// targets, LP dispatch.
inline RunResult run_policy(const World& w, const sim::ScenarioConfig& cfg, PolicyContext& pol,
                            std::vector<sim::Request> requests, std::uint64_t seed, bool record_series = true) {
    pol.validate();
    Rng placement_rng(seed, RngStream::placement);
    Rng policy_rng(seed, RngStream::policy);
    Rng forecast_rng(seed, RngStream::forecast);

    sim::SimState st = sim::make_state(*w.graph, *w.dist, *w.partition, cfg, std::move(requests), placement_rng);
    const int R = st.region_count();

    const auto truth = detail::demand_truth_by_window(st.requests, *w.partition, cfg.T_u_s, cfg.sim_duration_s);
    const int ticks = static_cast<int>(std::llround(cfg.sim_duration_s / cfg.T_l_s));
    const int upper_every = static_cast<int>(std::llround(cfg.T_u_s / cfg.T_l_s));
    const int lp_every = std::max(1, static_cast<int>(std::llround(pol.lp_period_s / cfg.T_l_s)));

    RunResult out;
    std::optional<Eigen::VectorXd> collect_staged_u;
    int window_index = 0;

    for (int tick = 0; tick <= ticks; ++tick) {
        if (tick > 0) sim::advance(st, cfg.T_l_s);
        sim::redistribute_newly_empty(st, policy_rng);
        sim::inject_requests(st);

        if (tick % upper_every == 0) {
            const bool upperish = pol.has_upper() || pol.kind == PolicyKind::random_collect;
            if (upperish) {
                sim::WindowMeasurement meas = sim::measure_window(st);
                Eigen::VectorXd w_meas(2 * R);
                w_meas.head(R) = meas.wO.cast<double>();
                w_meas.tail(R) = meas.wD.cast<double>();
                const Eigen::VectorXd y_meas = meas.y.cast<double>();

                if (pol.has_upper() && pol.controller->has_staged_input())
                    pol.controller->commit_measurement(w_meas, y_meas);
                if (pol.kind == PolicyKind::random_collect && collect_staged_u) {
                    out.collected.push_back({*collect_staged_u, w_meas, y_meas});
                    collect_staged_u.reset();
                }

                if (tick < ticks) {
                    if (pol.has_upper()) {
                        const int N = pol.controller->params().N;
                        std::vector<Eigen::MatrixXd> horizon(N, Eigen::MatrixXd::Zero(R, R));
                        for (int i = 0; i < N; ++i)
                            if (window_index + i < static_cast<int>(truth.size()))
                                horizon[i] = truth[window_index + i];
                        const auto noisy = deepc::perturb_forecast(horizon, pol.forecast_sigma2, forecast_rng);
                        Eigen::VectorXd w_future(2 * R * N);
                        for (int i = 0; i < N; ++i) w_future.segment(2 * R * i, 2 * R) = noisy[i];

                        const deepc::ControlCommand cmd = deepc::deepc_step(*pol.controller, w_future, meas.e);
                        const auto stats = sim::apply_upper_command(st, cmd, policy_rng);
                        out.upper_shortfall += stats.shortfall;
                        out.applied_commands.push_back(cmd.u_int);
                    } else {
                        // excitation policy: Dirichlet transfer ratios
                        Eigen::MatrixXd u_float(R, R);
                        for (int i = 0; i < R; ++i) {
                            const auto row = policy_rng.dirichlet_uniform(R);
                            for (int j = 0; j < R; ++j) u_float(i, j) = row[j] * meas.e(i);
                        }
                        const deepc::ControlCommand cmd = deepc::command_from_float(u_float, meas.e);
                        const auto stats = sim::apply_upper_command(st, cmd, policy_rng);
                        out.upper_shortfall += stats.shortfall;
                        out.applied_commands.push_back(cmd.u_int);
                        collect_staged_u = deepc::flatten_command(cmd.u_int);
                    }
                    ++window_index;
                }
            }
        }

        sim::match_requests(st);

        if (pol.has_lower()) detail::lower_layer_tick(w, st, pol, tick, out);
        if (pol.kind == PolicyKind::lp_rebalance && tick % lp_every == 0) detail::lp_rebalance_tick(st);

        if (record_series) {
            const Eigen::VectorXi e = sim::empty_counts(st);
            for (int r = 0; r < R; ++r) out.series.push_back({st.now_s, r, e(r)});
        }
    }

    out.metrics = sim::compute_metrics(st);
    if (pol.controller) {
        out.deepc_log = pol.controller->log();
        for (const auto& entry : out.deepc_log)
            if (entry.fallback) ++out.deepc_fallbacks;
    }
    return out;
}

// Data-collection run: T_d upper windows under random transfer ratios with
// the lower layer active. Returns exactly T_d (u, w, y) records.
inline RunResult collect_data_run(const World& w, sim::ScenarioConfig cfg, const cov::CoverageConfig& coverage,
                                  int T_d, std::uint64_t seed) {
    if (T_d < 1) throw ConfigError("collect: T_d must be >= 1");
    cfg.sim_duration_s = static_cast<double>(T_d) * cfg.T_u_s;
    Rng request_rng(seed, RngStream::requests);
    auto requests = sim::generate_requests(cfg, *w.partition, *w.density, request_rng);
    PolicyContext pol;
    pol.kind = PolicyKind::random_collect;
    pol.coverage = coverage;
    RunResult r = run_policy(w, cfg, pol, std::move(requests), seed, false);
    if (static_cast<int>(r.collected.size()) != T_d)
        throw RuntimeError("collect: expected " + std::to_string(T_d) + " records, got " +
                           std::to_string(r.collected.size()));
    return r;
}

}  // namespace amod::policy
