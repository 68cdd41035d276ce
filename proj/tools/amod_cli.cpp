// Experiment driver: network generation, data collection, policy runs,
// hyperparameter sweeps and report tables. Exit codes: 0 ok, 1 configuration
// error, 2 runtime error.

#include <CLI11.hpp>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "amod/cli/experiment.hpp"

namespace {

amod::cli::RunConfig load_config(const std::string& path, const std::vector<std::uint64_t>& seed_override,
                                 const std::string& out_override, const std::string& policy_override) {
    amod::cli::RunConfig cfg = path.empty() ? amod::cli::RunConfig{} : amod::cli::load_run_config(path);
    if (!seed_override.empty()) cfg.seeds = seed_override;
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (!policy_override.empty()) cfg.policy = policy_override;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical fleet rebalancing experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir, policy_override;
    std::vector<std::uint64_t> seeds;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration");
        sub->add_option("--seed", seeds, "seed list override");
        sub->add_option("--out", out_dir, "output directory override");
    };

    auto* net_gen = app.add_subcommand("net-gen", "generate a grid network and optional partition");
    int rows = 15, cols = 15, regions = 0;
    double spacing = 0.3;
    std::uint64_t kmeans_seed = 7;
    std::string net_out = "out";
    net_gen->add_option("--rows", rows, "grid rows")->check(CLI::PositiveNumber);
    net_gen->add_option("--cols", cols, "grid cols")->check(CLI::PositiveNumber);
    net_gen->add_option("--spacing-km", spacing, "link length in km");
    net_gen->add_option("--regions", regions, "also export a k-means partition with this many regions");
    net_gen->add_option("--kmeans-seed", kmeans_seed, "partition seed");
    net_gen->add_option("--out", net_out, "output directory");

    auto* collect = app.add_subcommand("collect", "run the excitation policy and record (u, w, y) data");
    add_common(collect);

    auto* run = app.add_subcommand("run", "run one policy over the configured seeds");
    run->add_option("--policy", policy_override, "policy override (no_control|lower_only|upper_only|hierarchical|lp)");
    add_common(run);

    auto* sweep = app.add_subcommand("sweep", "sweep alpha or sigma2 over a value list");
    std::string sweep_param = "alpha";
    std::vector<double> sweep_values;
    int sweep_jobs = 2;
    sweep->add_option("--param", sweep_param, "alpha or sigma2");
    sweep->add_option("--values", sweep_values, "value list")->required();
    sweep->add_option("--jobs", sweep_jobs, "parallel runs");
    add_common(sweep);

    auto* report = app.add_subcommand("report", "seed-averaged comparison table from metrics CSVs");
    std::vector<std::string> report_inputs;
    std::string report_out;
    report->add_option("inputs", report_inputs, "metrics.csv files")->required();
    report->add_option("--out", report_out, "also write the table as CSV to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (net_gen->parsed()) {
            const auto graph = amod::net::generate_grid_network(rows, cols, spacing);
            std::filesystem::create_directories(net_out);
            graph.save(net_out + "/nodes.csv", net_out + "/links.csv");
            std::cout << "wrote " << net_out << "/nodes.csv (" << graph.node_count() << " nodes), " << net_out
                      << "/links.csv (" << graph.link_count() << " links)\n";
            if (regions > 0) {
                const auto partition = amod::net::kmeans_partition(graph, regions, kmeans_seed);
                partition.save(net_out + "/partition.csv");
                std::cout << "wrote " << net_out << "/partition.csv (" << regions << " regions)\n";
            }
            return 0;
        }
        if (collect->parsed()) {
            auto cfg = load_config(config_path, seeds, out_dir, "");
            amod::cli::cmd_collect(cfg);
            return 0;
        }
        if (run->parsed()) {
            auto cfg = load_config(config_path, seeds, out_dir, policy_override);
            const auto rows_out = amod::cli::cmd_run(cfg);
            std::cout << "wrote " << cfg.out_dir << "/metrics.csv (" << rows_out.size() << " run(s))\n";
            return 0;
        }
        if (sweep->parsed()) {
            amod::cli::SweepSpec spec;
            spec.parameter = sweep_param;
            spec.values = sweep_values;
            spec.base = load_config(config_path, seeds, out_dir, "");
            const bool ok = amod::cli::cmd_sweep(spec, sweep_jobs);
            std::cout << "wrote " << spec.base.out_dir << "/sweep_runs.csv and sweep_agg.csv\n";
            return ok ? 0 : 2;
        }
        if (report->parsed()) {
            const auto table = amod::cli::build_report(report_inputs);
            std::cout << amod::cli::report_text(table);
            if (!report_out.empty()) amod::write_file_atomic(report_out, amod::cli::report_csv(table));
            return 0;
        }
    } catch (const amod::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
