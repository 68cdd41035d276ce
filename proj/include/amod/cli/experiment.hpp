#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "amod/cli/config.hpp"
#include "amod/common/stats.hpp"
#include "amod/policy/policies.hpp"

namespace amod::cli {

// Everything derived from a run configuration that is shared read-only by all
// seeded runs of a scenario.
struct BuiltWorld {
    net::RoadGraph graph;
    net::DistanceMatrix dist;
    net::RegionPartition partition;
    net::DemandDensity density;
    std::vector<int> capitals;         // node nearest each region centroid
    Eigen::RowVectorXd input_weights;  // flattened R x R rebalancing-length weights, zero diagonal

    BuiltWorld(net::RoadGraph g, net::DistanceMatrix d, net::RegionPartition p, net::DemandDensity dd)
        : graph(std::move(g)), dist(std::move(d)), partition(std::move(p)), density(std::move(dd)) {}

    policy::World view() const { return {&graph, &dist, &partition, &density}; }
};

inline BuiltWorld build_world(const RunConfig& c) {
    net::RoadGraph graph = c.network.grid
                               ? net::generate_grid_network(c.network.grid->rows, c.network.grid->cols,
                                                            c.network.grid->spacing_km)
                               : net::load_network(*c.network.nodes_csv, *c.network.links_csv);
    net::DistanceMatrix dist = net::all_pairs_shortest_paths(graph);
    net::RegionPartition partition = net::kmeans_partition(graph, c.regions.count, c.regions.kmeans_seed);

    std::vector<int> capitals(partition.region_count);
    for (int r = 0; r < partition.region_count; ++r) {
        double best = std::numeric_limits<double>::infinity();
        for (int q : partition.members[r]) {
            const double dx = graph.node(q).x - partition.seeds[r].first;
            const double dy = graph.node(q).y - partition.seeds[r].second;
            const double d2 = dx * dx + dy * dy;
            if (d2 < best) {
                best = d2;
                capitals[r] = q;
            }
        }
    }

    std::vector<int> hotspots = c.density.hotspot_nodes.value_or(capitals);
    if (static_cast<int>(hotspots.size()) != partition.region_count)
        throw ConfigError("density: need one hotspot node per region");
    if (static_cast<int>(c.scenario.phi_origin.size()) != partition.region_count)
        throw ConfigError("scenario: phi_origin size does not match region count");

    net::DemandDensity density = net::DemandDensity::hotspot_mixture(
        graph, partition, dist, c.scenario.phi_origin, hotspots, c.density.bandwidth_km, c.density.floor_weight);

    BuiltWorld w(std::move(graph), std::move(dist), std::move(partition), std::move(density));
    w.capitals = capitals;

    const int R = w.partition.region_count;
    w.input_weights = Eigen::RowVectorXd::Zero(R * R);
    if (c.deepc.input_weights) {
        const auto& m = *c.deepc.input_weights;
        if (static_cast<int>(m.size()) != R) throw ConfigError("deepc: input_weights must be R x R");
        for (int i = 0; i < R; ++i) {
            if (static_cast<int>(m[i].size()) != R) throw ConfigError("deepc: input_weights must be R x R");
            for (int j = 0; j < R; ++j) w.input_weights(i * R + j) = (i == j) ? 0.0 : m[i][j];
        }
    } else {
        // average inter-regional rebalancing trip length, proxied by the
        // capital-to-capital shortest path distance
        for (int i = 0; i < R; ++i)
            for (int j = 0; j < R; ++j)
                if (i != j) w.input_weights(i * R + j) = w.dist.dist(w.capitals[i], w.capitals[j]);
    }
    return w;
}

// ---- collected-data file ----

inline void save_collected_csv(const std::vector<policy::CollectedRecord>& records, const std::string& path) {
    if (records.empty()) throw RuntimeError("collect: no records to save");
    const int m = static_cast<int>(records.front().u.size());
    const int q = static_cast<int>(records.front().w.size());
    const int p = static_cast<int>(records.front().y.size());
    std::ostringstream os;
    os << "k";
    for (int i = 0; i < m; ++i) os << ",u_" << i;
    for (int i = 0; i < q; ++i) os << ",w_" << i;
    for (int i = 0; i < p; ++i) os << ",y_" << i;
    os << "\n";
    for (std::size_t k = 0; k < records.size(); ++k) {
        os << k;
        for (int i = 0; i < m; ++i) os << "," << std::llround(records[k].u(i));
        for (int i = 0; i < q; ++i) os << "," << std::llround(records[k].w(i));
        for (int i = 0; i < p; ++i) os << "," << std::llround(records[k].y(i));
        os << "\n";
    }
    write_file_atomic(path, os.str());
}

struct CollectedData {
    deepc::SignalSeries u, w, y;
};

inline CollectedData load_collected_csv(const std::string& path, int m, int q, int p) {
    if (!std::filesystem::exists(path))
        throw ConfigError("collected data file not found: " + path + " (run the `collect` subcommand first)");
    CsvTable t = read_csv(path);
    const int expected = 1 + m + q + p;
    if (static_cast<int>(t.header.size()) != expected)
        throw ConfigError(path + ": expected " + std::to_string(expected) + " columns for R^2 + 2R + R signals, got " +
                          std::to_string(t.header.size()));
    const int T = static_cast<int>(t.rows.size());
    if (T < 1) throw ConfigError(path + ": no data rows");
    Eigen::MatrixXd mu(m, T), mw(q, T), my(p, T);
    for (int k = 0; k < T; ++k) {
        const auto& row = t.rows[k];
        for (int i = 0; i < m; ++i) mu(i, k) = csv_double(row[1 + i], path);
        for (int i = 0; i < q; ++i) mw(i, k) = csv_double(row[1 + m + i], path);
        for (int i = 0; i < p; ++i) my(i, k) = csv_double(row[1 + m + q + i], path);
    }
    return {deepc::SignalSeries(std::move(mu)), deepc::SignalSeries(std::move(mw)),
            deepc::SignalSeries(std::move(my))};
}

// ---- controller assembly ----

// Reusable per-scenario controller ingredients: the Hankel set and the
// seeding window are identical for every run; only weights may vary (alpha
// sweeps).
struct ControllerBlueprint {
    deepc::HankelSet hankels;
    deepc::DeepcParams params;
    deepc::QpSettings qp_settings;
    double accept_residual = 1e-3;
    std::vector<Eigen::VectorXd> tail_u, tail_w, tail_y;
};

inline ControllerBlueprint make_controller_blueprint(const BuiltWorld& world, const RunConfig& c) {
    const int R = world.partition.region_count;
    const int m = R * R, q = 2 * R, p = R;
    if (!c.collected_data)
        throw ConfigError("policy '" + c.policy +
                          "' needs a collected-data file; set collected_data or run the `collect` subcommand");
    CollectedData data = load_collected_csv(*c.collected_data, m, q, p);

    ControllerBlueprint bp;
    const int n_assumed = c.deepc.n_assumed == -2 ? 2 * R : c.deepc.n_assumed;
    bp.hankels = deepc::assemble_hankel_set(data.u, data.w, data.y, c.deepc.T_ini, c.deepc.N, n_assumed);
    bp.params.T_ini = c.deepc.T_ini;
    bp.params.N = c.deepc.N;
    bp.params.lambda_g = c.deepc.lambda_g;
    bp.params.lambda_y = c.deepc.lambda_y;
    bp.params.alpha = c.deepc.alpha;
    bp.params.Q = Eigen::Map<const Eigen::RowVectorXd>(c.scenario.phi_origin.data(), R);
    bp.params.Rw = world.input_weights;
    bp.params.budget_groups = deepc::region_budget_groups(R);
    bp.params.n_assumed = n_assumed;
    bp.qp_settings.tol = c.deepc.solver_tol;
    bp.qp_settings.max_iter = c.deepc.solver_max_iter;
    bp.accept_residual = c.deepc.accept_residual;

    const int T = data.u.length();
    for (int k = T - c.deepc.T_ini; k < T; ++k) {
        bp.tail_u.push_back(data.u.samples.col(k));
        bp.tail_w.push_back(data.w.samples.col(k));
        bp.tail_y.push_back(data.y.samples.col(k));
    }
    return bp;
}

inline deepc::DeepcController make_controller(const ControllerBlueprint& bp) {
    deepc::DeepcController ctrl(bp.hankels, bp.params, bp.qp_settings, bp.accept_residual);
    ctrl.seed_history(bp.tail_u, bp.tail_w, bp.tail_y);
    return ctrl;
}

// ---- single runs ----

inline std::vector<sim::Request> requests_for_seed(const BuiltWorld& world, const RunConfig& c,
                                                   std::uint64_t seed) {
    if (c.trace_csv) return sim::load_request_trace(*c.trace_csv, world.graph.node_count());
    Rng rng(seed, RngStream::requests);
    return sim::generate_requests(c.scenario, world.partition, world.density, rng);
}

inline policy::RunResult run_single(const BuiltWorld& world, const RunConfig& c,
                                    const ControllerBlueprint* blueprint, std::uint64_t seed,
                                    bool record_series = true) {
    policy::PolicyContext pol;
    pol.kind = policy::policy_from_string(c.policy);
    pol.coverage.radius_km = c.coverage.radius_km;
    pol.dump_coverage = c.coverage.dump;
    pol.lp_period_s = c.lp_period_s;
    pol.forecast_sigma2 = c.forecast_sigma2;
    if (pol.has_upper()) {
        if (!blueprint) throw ConfigError("internal: upper policy run without a controller blueprint");
        pol.controller = make_controller(*blueprint);
    }
    return policy::run_policy(world.view(), c.scenario, pol, requests_for_seed(world, c, seed), seed,
                              record_series);
}

// ---- output files ----

inline std::string metrics_csv_text(const std::vector<std::pair<std::uint64_t, sim::MetricsReport>>& rows,
                                    const std::string& policy) {
    std::ostringstream os;
    os << "policy,seed,answer_rate,avg_wait_s,rebalance_km,vur\n";
    for (const auto& [seed, m] : rows) {
        os << policy << "," << seed << "," << fmt_double(m.answer_rate) << "," << fmt_double(m.avg_wait_s, 3) << ","
           << fmt_double(m.rebalance_km, 3) << "," << fmt_double(m.vur) << "\n";
    }
    return os.str();
}

inline std::string timeseries_csv_text(const std::vector<sim::TimeSeriesRow>& series) {
    std::ostringstream os;
    os << "t_s,region,empty_vehicles\n";
    for (const auto& r : series) os << fmt_double(r.t_s, 1) << "," << r.region << "," << r.empty_vehicles << "\n";
    return os.str();
}

inline std::string deepc_log_csv_text(const std::vector<deepc::SolveLogEntry>& log) {
    std::ostringstream os;
    os << "step,status,iterations,primal_residual,dual_residual,objective,fallback\n";
    for (const auto& e : log) {
        os << e.step << "," << deepc::to_string(e.status) << "," << e.iterations << ",";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.3e", e.primal_residual);
        os << buf << ",";
        std::snprintf(buf, sizeof(buf), "%.3e", e.dual_residual);
        os << buf << "," << fmt_double(e.objective, 3) << "," << (e.fallback ? 1 : 0) << "\n";
    }
    return os.str();
}

inline std::string coverage_dump_csv_text(const std::vector<policy::CoverageDumpRow>& rows) {
    std::ostringstream os;
    os << "step,vehicle_id,node_id,cell_size,centroid_node,objective\n";
    for (const auto& r : rows)
        os << r.step << "," << r.vehicle_id << "," << r.node_id << "," << r.cell_size << "," << r.centroid_node
           << "," << fmt_double(r.objective) << "\n";
    return os.str();
}

// Runs every seed of the configuration and writes metrics, time series and
// diagnostic files under out_dir.
inline std::vector<std::pair<std::uint64_t, sim::MetricsReport>> cmd_run(const RunConfig& c) {
    const BuiltWorld world = build_world(c);
    c.scenario.validate(world.partition.region_count);
    policy::PolicyContext probe;
    probe.kind = policy::policy_from_string(c.policy);
    std::optional<ControllerBlueprint> bp;
    if (probe.kind == policy::PolicyKind::upper_only || probe.kind == policy::PolicyKind::hierarchical)
        bp = make_controller_blueprint(world, c);

    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    std::vector<std::pair<std::uint64_t, sim::MetricsReport>> rows;
    for (std::uint64_t seed : c.seeds) {
        policy::RunResult r = run_single(world, c, bp ? &*bp : nullptr, seed);
        rows.emplace_back(seed, r.metrics);
        write_file_atomic(c.out_dir + "/timeseries_" + c.policy + "_seed" + std::to_string(seed) + ".csv",
                          timeseries_csv_text(r.series));
        if (!r.deepc_log.empty())
            write_file_atomic(c.out_dir + "/deepc_log_seed" + std::to_string(seed) + ".csv",
                              deepc_log_csv_text(r.deepc_log));
        if (!r.coverage_dump.empty())
            write_file_atomic(c.out_dir + "/coverage_seed" + std::to_string(seed) + ".csv",
                              coverage_dump_csv_text(r.coverage_dump));
    }
    write_file_atomic(c.out_dir + "/metrics.csv", metrics_csv_text(rows, c.policy));
    world.partition.save(c.out_dir + "/partition.csv");

    json meta;
    meta["policy"] = c.policy;
    meta["fleet_size"] = c.scenario.fleet_size;
    meta["sim_duration_s"] = c.scenario.sim_duration_s;
    meta["request_rate_per_s"] = c.scenario.request_rate_per_s;
    meta["seeds"] = c.seeds;
    write_file_atomic(c.out_dir + "/meta.json", meta.dump(2) + "\n");

    std::ostringstream summary;
    summary << "policy " << c.policy << ", " << rows.size() << " seed(s)\n";
    std::vector<double> ar, wait, reb, vur;
    for (const auto& [seed, m] : rows) {
        ar.push_back(m.answer_rate);
        wait.push_back(m.avg_wait_s);
        reb.push_back(m.rebalance_km);
        vur.push_back(m.vur);
    }
    summary << "answer_rate " << fmt_double(100.0 * mean_of(ar), 1) << "%, avg_wait " << fmt_double(mean_of(wait), 1)
            << " s, rebalance " << fmt_double(mean_of(reb), 1) << " km, vur " << fmt_double(100.0 * mean_of(vur), 1)
            << "%\n";
    write_file_atomic(c.out_dir + "/summary.txt", summary.str());
    return rows;
}

// The collect subcommand: one excitation run, the collected CSV and a sidecar
// with its provenance. Prints the persistent-excitation diagnostic.
inline std::string cmd_collect(const RunConfig& c, std::ostream& diag = std::cout) {
    const BuiltWorld world = build_world(c);
    c.scenario.validate(world.partition.region_count);
    const std::uint64_t seed = c.seeds.front();
    cov::CoverageConfig cov_cfg;
    cov_cfg.radius_km = c.coverage.radius_km;
    policy::RunResult r = policy::collect_data_run(world.view(), c.scenario, cov_cfg, c.deepc.T_d, seed);

    namespace fs = std::filesystem;
    fs::create_directories(c.out_dir);
    const std::string path = c.collected_data ? *c.collected_data : c.out_dir + "/collected.csv";
    save_collected_csv(r.collected, path);

    json sidecar;
    sidecar["T_d"] = c.deepc.T_d;
    sidecar["T_u_s"] = c.scenario.T_u_s;
    sidecar["regions"] = world.partition.region_count;
    sidecar["seed"] = seed;
    write_file_atomic(path + ".meta.json", sidecar.dump(2) + "\n");

    // excitation diagnostic on the freshly collected data
    const int R = world.partition.region_count;
    const int n_assumed = c.deepc.n_assumed == -2 ? 2 * R : c.deepc.n_assumed;
    CollectedData data = load_collected_csv(path, R * R, 2 * R, R);
    const deepc::HankelSet h =
        deepc::assemble_hankel_set(data.u, data.w, data.y, c.deepc.T_ini, c.deepc.N, n_assumed);
    diag << "collected " << c.deepc.T_d << " windows to " << path << "\n";
    if (n_assumed >= 0) {
        // Row and column sums of each window's OD matrix count the same
        // requests, so the disturbance signal carries one exact linear
        // identity and full row rank is structurally out of reach; the
        // achievable maximum is one less per block row.
        const Eigen::Index structural_max = h.pe_required_rank - h.pe_order_checked;
        diag << "persistent excitation at order " << h.pe_order_checked << ": rank " << h.pe_rank << " of "
             << h.pe_required_rank << " (structural maximum " << structural_max << ": "
             << (h.pe_rank >= structural_max ? "reached" : "NOT reached, data may be poorly exciting") << ")\n";
    }
    return path;
}

// ---- sweep ----

struct SweepRunRow {
    double value;
    std::uint64_t seed;
    sim::MetricsReport metrics;
    bool failed = false;
    std::string error;
};

inline RunConfig apply_sweep_value(RunConfig c, const std::string& parameter, double value) {
    if (parameter == "alpha") {
        c.deepc.alpha = value;
    } else if (parameter == "sigma2") {
        c.forecast_sigma2 = value;
    } else {
        throw ConfigError("sweep: unknown parameter '" + parameter + "' (use alpha or sigma2)");
    }
    return c;
}

// Runs value x seed points (two worker threads), writes the per-run CSV and
// the per-value aggregate CSV. Returns false if any point failed.
inline bool cmd_sweep(const SweepSpec& spec, int jobs = 2) {
    if (spec.parameter != "alpha" && spec.parameter != "sigma2")
        throw ConfigError("sweep: unknown parameter '" + spec.parameter + "' (use alpha or sigma2)");
    if (spec.values.empty()) throw ConfigError("sweep: value list must not be empty");
    for (double v : spec.values)
        if (v < 0.0) throw ConfigError("sweep: values must be nonnegative");

    const BuiltWorld world = build_world(spec.base);
    spec.base.scenario.validate(world.partition.region_count);
    policy::PolicyKind kind = policy::policy_from_string(spec.base.policy);
    std::optional<ControllerBlueprint> bp;
    if (kind == policy::PolicyKind::upper_only || kind == policy::PolicyKind::hierarchical)
        bp = make_controller_blueprint(world, spec.base);

    std::vector<std::pair<double, std::uint64_t>> points;
    for (double v : spec.values)
        for (std::uint64_t s : spec.base.seeds) points.emplace_back(v, s);

    std::vector<SweepRunRow> rows(points.size());
    std::size_t next = 0;
    auto worker = [&](std::size_t i) {
        const auto [value, seed] = points[i];
        SweepRunRow row;
        row.value = value;
        row.seed = seed;
        try {
            RunConfig c = apply_sweep_value(spec.base, spec.parameter, value);
            std::optional<ControllerBlueprint> local_bp;
            const ControllerBlueprint* bp_ptr = nullptr;
            if (bp) {
                local_bp = *bp;  // independent controller state per run
                local_bp->params.alpha = c.deepc.alpha;
                bp_ptr = &*local_bp;
            }
            row.metrics = run_single(world, c, bp_ptr, seed, false).metrics;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows[i] = std::move(row);
    };
    // fixed-size thread pool over the point list
    std::mutex mu;
    auto pump = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (next >= points.size()) return;
                i = next++;
            }
            worker(i);
        }
    };
    std::vector<std::thread> threads;
    for (int t = 0; t < std::max(1, jobs); ++t) threads.emplace_back(pump);
    for (auto& t : threads) t.join();

    namespace fs = std::filesystem;
    fs::create_directories(spec.base.out_dir);
    std::ostringstream runs;
    runs << "param_value,seed,answer_rate,avg_wait_s,rebalance_km,vur\n";
    bool any_failed = false;
    for (const auto& r : rows) {
        if (r.failed) {
            any_failed = true;
            std::cerr << "sweep point " << spec.parameter << "=" << r.value << " seed " << r.seed
                      << " failed: " << r.error << "\n";
            continue;
        }
        runs << fmt_double(r.value) << "," << r.seed << "," << fmt_double(r.metrics.answer_rate) << ","
             << fmt_double(r.metrics.avg_wait_s, 3) << "," << fmt_double(r.metrics.rebalance_km, 3) << ","
             << fmt_double(r.metrics.vur) << "\n";
    }
    write_file_atomic(spec.base.out_dir + "/sweep_runs.csv", runs.str());

    std::ostringstream agg;
    agg << "param_value,n_seeds";
    const char* metrics_names[] = {"answer_rate", "avg_wait_s", "rebalance_km", "vur"};
    for (const char* name : metrics_names)
        agg << "," << name << "_mean," << name << "_p25," << name << "_p50," << name << "_p75," << name << "_p90";
    agg << "\n";
    for (double v : spec.values) {
        std::vector<std::vector<double>> cols(4);
        for (const auto& r : rows) {
            if (r.failed || r.value != v) continue;
            cols[0].push_back(r.metrics.answer_rate);
            cols[1].push_back(r.metrics.avg_wait_s);
            cols[2].push_back(r.metrics.rebalance_km);
            cols[3].push_back(r.metrics.vur);
        }
        if (cols[0].empty()) continue;
        agg << fmt_double(v) << "," << cols[0].size();
        for (const auto& col : cols) {
            agg << "," << fmt_double(mean_of(col)) << "," << fmt_double(percentile(col, 25)) << ","
                << fmt_double(percentile(col, 50)) << "," << fmt_double(percentile(col, 75)) << ","
                << fmt_double(percentile(col, 90));
        }
        agg << "\n";
    }
    write_file_atomic(spec.base.out_dir + "/sweep_agg.csv", agg.str());
    return !any_failed;
}

// ---- report ----

struct ReportRow {
    std::string policy;
    int runs = 0;
    double answer_rate_pct = 0.0;
    double wait_s = 0.0;
    double rebalance_km = 0.0;
    double vur_pct = 0.0;
    std::string note;
};

// Seed-averaged comparison table across metrics files, one row per policy in
// the reference presentation order.
inline std::vector<ReportRow> build_report(const std::vector<std::string>& metrics_files) {
    if (metrics_files.empty()) throw ConfigError("report: need at least one metrics CSV");
    struct Acc {
        std::vector<double> ar, wait, reb, vur;
        std::vector<int> fleets;
    };
    std::map<std::string, Acc> by_policy;
    for (const auto& path : metrics_files) {
        CsvTable t = read_csv(path);
        const int cp = t.column("policy"), ca = t.column("answer_rate"), cw = t.column("avg_wait_s"),
                  cr = t.column("rebalance_km"), cv = t.column("vur");
        if (cp < 0 || ca < 0 || cw < 0 || cr < 0 || cv < 0)
            throw ConfigError(path + ": not a metrics CSV (policy,seed,answer_rate,avg_wait_s,rebalance_km,vur)");
        int fleet = -1;
        const auto meta_path = std::filesystem::path(path).parent_path() / "meta.json";
        if (std::filesystem::exists(meta_path)) {
            std::ifstream in(meta_path);
            json meta;
            try {
                in >> meta;
                fleet = meta.value("fleet_size", -1);
            } catch (const json::exception&) {
                fleet = -1;
            }
        }
        for (const auto& row : t.rows) {
            Acc& a = by_policy[row[cp]];
            a.ar.push_back(csv_double(row[ca], path));
            a.wait.push_back(csv_double(row[cw], path));
            a.reb.push_back(csv_double(row[cr], path));
            a.vur.push_back(csv_double(row[cv], path));
            if (fleet > 0) a.fleets.push_back(fleet);
        }
    }

    std::vector<int> all_fleets;
    for (const auto& [name, a] : by_policy)
        for (int f : a.fleets) all_fleets.push_back(f);
    std::sort(all_fleets.begin(), all_fleets.end());
    all_fleets.erase(std::unique(all_fleets.begin(), all_fleets.end()), all_fleets.end());
    const bool mixed_fleets = all_fleets.size() > 1;

    const std::vector<std::string> order = {"hierarchical", "upper_only", "lower_only", "no_control", "lp"};
    std::vector<std::string> names;
    for (const auto& n : order)
        if (by_policy.count(n)) names.push_back(n);
    for (const auto& [n, a] : by_policy)
        if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);

    std::vector<ReportRow> rows;
    for (const auto& n : names) {
        const Acc& a = by_policy[n];
        ReportRow r;
        r.policy = n;
        r.runs = static_cast<int>(a.ar.size());
        r.answer_rate_pct = 100.0 * mean_of(a.ar);
        r.wait_s = mean_of(a.wait);
        r.rebalance_km = mean_of(a.reb);
        r.vur_pct = 100.0 * mean_of(a.vur);
        if (mixed_fleets && !a.fleets.empty()) {
            std::vector<int> f = a.fleets;
            std::sort(f.begin(), f.end());
            f.erase(std::unique(f.begin(), f.end()), f.end());
            std::string note = "fleet=";
            for (std::size_t i = 0; i < f.size(); ++i) note += (i ? "/" : "") + std::to_string(f[i]);
            r.note = note;
        }
        rows.push_back(r);
    }
    return rows;
}

inline std::string report_text(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-14s %6s %14s %16s %20s %8s  %s\n", "policy", "runs", "answer rate (%)",
                  "waiting time (s)", "rebalancing (km)", "VUR (%)", "note");
    os << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "%-14s %6d %15.1f %16.1f %20.1f %8.1f  %s\n", r.policy.c_str(), r.runs,
                      r.answer_rate_pct, r.wait_s, r.rebalance_km, r.vur_pct, r.note.c_str());
        os << buf;
    }
    return os.str();
}

inline std::string report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream os;
    os << "policy,runs,answer_rate_pct,avg_wait_s,rebalance_km,vur_pct,note\n";
    for (const auto& r : rows)
        os << r.policy << "," << r.runs << "," << fmt_double(r.answer_rate_pct, 2) << "," << fmt_double(r.wait_s, 2)
           << "," << fmt_double(r.rebalance_km, 2) << "," << fmt_double(r.vur_pct, 2) << "," << r.note << "\n";
    return os.str();
}

}  // namespace amod::cli
