#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "amod/common/error.hpp"
#include "amod/sim/types.hpp"

namespace amod::cli {

using nlohmann::json;

struct GridSpec {
    int rows = 15;
    int cols = 15;
    double spacing_km = 0.3;
};

struct NetworkConfig {
    std::optional<GridSpec> grid = GridSpec{};
    std::optional<std::string> nodes_csv;
    std::optional<std::string> links_csv;
};

struct RegionsConfig {
    int count = 5;
    std::uint64_t kmeans_seed = 7;
};

struct DensityConfig {
    std::optional<std::vector<int>> hotspot_nodes;  // default: node nearest each region centroid
    double bandwidth_km = 0.9;
    double floor_weight = 1e-6;
};

struct DeepcConfig {
    int T_ini = 35;
    int N = 10;
    int T_d = 3000;
    double lambda_g = 1000.0;
    double lambda_y = 0.01;
    double alpha = 150.0;
    int n_assumed = -2;  // -2: use 2R; -1: skip the excitation diagnostic
    std::optional<std::vector<std::vector<double>>> input_weights;  // R x R; default centroid distances
    double solver_tol = 1e-5;
    int solver_max_iter = 6000;
    double accept_residual = 1e-3;
};

struct CoverageCliConfig {
    double radius_km = 1.5;
    bool dump = false;
};

struct RunConfig {
    NetworkConfig network;
    RegionsConfig regions;
    DensityConfig density;
    sim::ScenarioConfig scenario;
    std::optional<std::string> trace_csv;
    DeepcConfig deepc;
    CoverageCliConfig coverage;
    double forecast_sigma2 = 0.0;
    double lp_period_s = 30.0;
    std::string policy = "hierarchical";
    std::optional<std::string> collected_data;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir = "out";

    RunConfig() {
        // reference experiment defaults; desk configs override scale knobs
        scenario.fleet_size = 300;
        scenario.sim_duration_s = 10800.0;
        scenario.request_rate_per_s = 5500.0 / 10800.0;
        scenario.phi_origin = {0.06, 0.35, 0.22, 0.29, 0.08};
        scenario.phi_dest = {0.16, 0.28, 0.17, 0.27, 0.12};
    }
};

struct SweepSpec {
    std::string parameter;  // "alpha" or "sigma2"
    std::vector<double> values;
    RunConfig base;
};

namespace detail {

template <typename T>
void get_to_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) j.at(key).get_to(out);
}

inline void get_opt_string(const json& j, const char* key, std::optional<std::string>& out) {
    if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<std::string>();
}

}  // namespace detail

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    try {
        if (j.contains("network")) {
            const auto& n = j.at("network");
            if (n.contains("grid") && !n.at("grid").is_null()) {
                GridSpec g;
                detail::get_to_if(n.at("grid"), "rows", g.rows);
                detail::get_to_if(n.at("grid"), "cols", g.cols);
                detail::get_to_if(n.at("grid"), "spacing_km", g.spacing_km);
                c.network.grid = g;
            }
            detail::get_opt_string(n, "nodes_csv", c.network.nodes_csv);
            detail::get_opt_string(n, "links_csv", c.network.links_csv);
            if (c.network.nodes_csv || c.network.links_csv) {
                if (!(c.network.nodes_csv && c.network.links_csv))
                    throw ConfigError("network: nodes_csv and links_csv must be given together");
                c.network.grid.reset();
            }
        }
        if (j.contains("regions")) {
            detail::get_to_if(j.at("regions"), "count", c.regions.count);
            detail::get_to_if(j.at("regions"), "kmeans_seed", c.regions.kmeans_seed);
        }
        if (j.contains("density")) {
            const auto& d = j.at("density");
            if (d.contains("hotspot_nodes") && !d.at("hotspot_nodes").is_null())
                c.density.hotspot_nodes = d.at("hotspot_nodes").get<std::vector<int>>();
            detail::get_to_if(d, "bandwidth_km", c.density.bandwidth_km);
            detail::get_to_if(d, "floor_weight", c.density.floor_weight);
        }
        if (j.contains("scenario")) {
            const auto& s = j.at("scenario");
            detail::get_to_if(s, "fleet_size", c.scenario.fleet_size);
            detail::get_to_if(s, "sim_duration_s", c.scenario.sim_duration_s);
            detail::get_to_if(s, "request_rate_per_s", c.scenario.request_rate_per_s);
            detail::get_to_if(s, "phi_origin", c.scenario.phi_origin);
            detail::get_to_if(s, "phi_dest", c.scenario.phi_dest);
            detail::get_to_if(s, "speed_kmh", c.scenario.speed_kmh);
            detail::get_to_if(s, "T_l_s", c.scenario.T_l_s);
            detail::get_to_if(s, "T_u_s", c.scenario.T_u_s);
            detail::get_to_if(s, "T_m_s", c.scenario.T_m_s);
            detail::get_to_if(s, "T_w_s", c.scenario.T_w_s);
        }
        if (j.contains("requests")) detail::get_opt_string(j.at("requests"), "trace_csv", c.trace_csv);
        if (j.contains("deepc")) {
            const auto& d = j.at("deepc");
            detail::get_to_if(d, "T_ini", c.deepc.T_ini);
            detail::get_to_if(d, "N", c.deepc.N);
            detail::get_to_if(d, "T_d", c.deepc.T_d);
            detail::get_to_if(d, "lambda_g", c.deepc.lambda_g);
            detail::get_to_if(d, "lambda_y", c.deepc.lambda_y);
            detail::get_to_if(d, "alpha", c.deepc.alpha);
            detail::get_to_if(d, "n_assumed", c.deepc.n_assumed);
            if (d.contains("input_weights") && !d.at("input_weights").is_null())
                c.deepc.input_weights = d.at("input_weights").get<std::vector<std::vector<double>>>();
            if (d.contains("solver")) {
                detail::get_to_if(d.at("solver"), "tol", c.deepc.solver_tol);
                detail::get_to_if(d.at("solver"), "max_iter", c.deepc.solver_max_iter);
                detail::get_to_if(d.at("solver"), "accept_residual", c.deepc.accept_residual);
            }
        }
        if (j.contains("coverage")) {
            detail::get_to_if(j.at("coverage"), "radius_km", c.coverage.radius_km);
            detail::get_to_if(j.at("coverage"), "dump", c.coverage.dump);
        }
        if (j.contains("forecast")) detail::get_to_if(j.at("forecast"), "sigma2", c.forecast_sigma2);
        if (j.contains("lp")) detail::get_to_if(j.at("lp"), "period_s", c.lp_period_s);
        detail::get_to_if(j, "policy", c.policy);
        detail::get_opt_string(j, "collected_data", c.collected_data);
        detail::get_to_if(j, "seeds", c.seeds);
        detail::get_to_if(j, "out_dir", c.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.seeds.empty()) throw ConfigError("config: seed list must not be empty");
    return c;
}

inline json to_json(const RunConfig& c) {
    json j;
    if (c.network.grid) {
        j["network"]["grid"] = {{"rows", c.network.grid->rows},
                                {"cols", c.network.grid->cols},
                                {"spacing_km", c.network.grid->spacing_km}};
    } else {
        j["network"]["grid"] = nullptr;
    }
    j["network"]["nodes_csv"] = c.network.nodes_csv ? json(*c.network.nodes_csv) : json(nullptr);
    j["network"]["links_csv"] = c.network.links_csv ? json(*c.network.links_csv) : json(nullptr);
    j["regions"] = {{"count", c.regions.count}, {"kmeans_seed", c.regions.kmeans_seed}};
    j["density"]["hotspot_nodes"] = c.density.hotspot_nodes ? json(*c.density.hotspot_nodes) : json(nullptr);
    j["density"]["bandwidth_km"] = c.density.bandwidth_km;
    j["density"]["floor_weight"] = c.density.floor_weight;
    j["scenario"] = {{"fleet_size", c.scenario.fleet_size},
                     {"sim_duration_s", c.scenario.sim_duration_s},
                     {"request_rate_per_s", c.scenario.request_rate_per_s},
                     {"phi_origin", c.scenario.phi_origin},
                     {"phi_dest", c.scenario.phi_dest},
                     {"speed_kmh", c.scenario.speed_kmh},
                     {"T_l_s", c.scenario.T_l_s},
                     {"T_u_s", c.scenario.T_u_s},
                     {"T_m_s", c.scenario.T_m_s},
                     {"T_w_s", c.scenario.T_w_s}};
    j["requests"]["trace_csv"] = c.trace_csv ? json(*c.trace_csv) : json(nullptr);
    j["deepc"] = {{"T_ini", c.deepc.T_ini},
                  {"N", c.deepc.N},
                  {"T_d", c.deepc.T_d},
                  {"lambda_g", c.deepc.lambda_g},
                  {"lambda_y", c.deepc.lambda_y},
                  {"alpha", c.deepc.alpha},
                  {"n_assumed", c.deepc.n_assumed},
                  {"input_weights", c.deepc.input_weights ? json(*c.deepc.input_weights) : json(nullptr)},
                  {"solver",
                   {{"tol", c.deepc.solver_tol},
                    {"max_iter", c.deepc.solver_max_iter},
                    {"accept_residual", c.deepc.accept_residual}}}};
    j["coverage"] = {{"radius_km", c.coverage.radius_km}, {"dump", c.coverage.dump}};
    j["forecast"] = {{"sigma2", c.forecast_sigma2}};
    j["lp"] = {{"period_s", c.lp_period_s}};
    j["policy"] = c.policy;
    j["collected_data"] = c.collected_data ? json(*c.collected_data) : json(nullptr);
    j["seeds"] = c.seeds;
    j["out_dir"] = c.out_dir;
    return j;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

}  // namespace amod::cli
