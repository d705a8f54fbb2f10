// fedsim: command-line front end for the federated-learning simulator.

#include "fedsim/config.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/partition.hpp"
#include "fedsim/selfcheck.hpp"
#include "fedsim/text.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::string& config_path) {
    const auto config = fedsim::parse_config(config_path);
    const auto result = fedsim::run_experiment(config);
    const auto& dir = result.dir;
    std::cout << "rounds:      " << (dir / "rounds.csv").string() << '\n'
              << "model:       " << (dir / "model.bin").string() << '\n'
              << "partition:   " << (dir / "partition.txt").string() << '\n'
              << "server set:  " << (dir / "server_set.txt").string() << '\n'
              << "config:      " << (dir / "config.resolved").string() << '\n'
              << "manifest:    " << (dir / "manifest.json").string() << '\n';
    if (config.instrument_global_loss || config.emit_dissimilarity)
        std::cout << "diagnostics: " << (dir / "diagnostics.csv").string() << '\n';
    return 0;
}

int cmd_sweep(const std::string& config_path) {
    const auto config = fedsim::parse_config(config_path);
    const auto sweep = fedsim::run_sweep(config);
    for (const auto& run : sweep.runs)
        std::cout << "run:     " << run.dir.string() << '\n';
    std::cout << "summary: " << sweep.summary_path.string() << '\n'
              << "final test accuracy: " << fedsim::format_double(sweep.mean_final_acc_test) << " +/- "
              << fedsim::format_double(sweep.std_final_acc_test) << '\n';
    return 0;
}

int cmd_partition_stats(const std::string& config_path) {
    const auto config = fedsim::parse_config(config_path);
    const auto sim = fedsim::prepare_simulation(config);
    const auto stats = fedsim::partition_stats(sim.partition, sim.split.remainder);
    const auto entropy = fedsim::client_label_entropy(stats);
    std::cout << "client";
    for (int c = 0; c < sim.split.remainder.num_classes(); ++c)
        std::cout << ",class_" << c;
    std::cout << ",total,max_class_share,entropy\n";
    for (std::size_t k = 0; k < stats.size(); ++k) {
        const auto total = std::accumulate(stats[k].begin(), stats[k].end(), std::size_t{0});
        const auto top = *std::max_element(stats[k].begin(), stats[k].end());
        std::cout << k;
        for (auto n : stats[k])
            std::cout << ',' << n;
        std::cout << ',' << total << ',' << fedsim::format_double(static_cast<double>(top) / static_cast<double>(total))
                  << ',' << fedsim::format_double(entropy[k]) << '\n';
    }
    std::cout << "# server set: " << sim.split.server.data.size() << " samples (" << config.per_class
              << " per class); redraws: " << sim.partition.redraws << '\n';
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::optional<double>& target) {
    std::vector<fs::path> paths(dirs.begin(), dirs.end());
    double resolved = 0.0;
    const auto rows = fedsim::compare_runs(paths, target, &resolved);
    std::cout << fedsim::format_compare_table(rows, resolved);
    return 0;
}

int cmd_plotdata(const std::vector<std::string>& dirs, const std::string& out_path) {
    std::vector<fs::path> paths(dirs.begin(), dirs.end());
    if (out_path.empty() || out_path == "-") {
        fedsim::write_plot_data(paths, std::cout);
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out)
        throw fedsim::IoError("cannot write " + out_path);
    fedsim::write_plot_data(paths, out);
    std::cout << "plot data: " << out_path << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic federated-learning simulator (FedAvg, FedProx, FedPDC)"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "Run one experiment from a config file");
    run->add_option("config", config_path, "Config file")->required();

    auto* sweep = app.add_subcommand("sweep", "Run the config once per entry of `seeds` and summarize");
    sweep->add_option("config", config_path, "Config file")->required();

    auto* stats = app.add_subcommand("partition-stats", "Print the per-client class counts of a config's split");
    stats->add_option("config", config_path, "Config file")->required();

    std::vector<std::string> dirs;
    std::optional<double> target;
    auto* compare = app.add_subcommand("compare", "Rounds-to-target and speedup table; first run is the baseline");
    compare->add_option("run_dirs", dirs, "Run directories")->required();
    compare->add_option("--target", target, "Target test accuracy (default: baseline's final accuracy)");

    std::string out_path;
    auto* plot = app.add_subcommand("plotdata", "Emit long-format CSV for plotting");
    plot->add_option("run_dirs", dirs, "Run directories")->required();
    plot->add_option("-o,--output", out_path, "Output file (default: stdout)");

    auto* check = app.add_subcommand("check", "Run the property smoke suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*run)
            return cmd_run(config_path);
        if (*sweep)
            return cmd_sweep(config_path);
        if (*stats)
            return cmd_partition_stats(config_path);
        if (*compare)
            return cmd_compare(dirs, target);
        if (*plot)
            return cmd_plotdata(dirs, out_path);
        if (*check)
            return fedsim::run_self_check(std::cout) ? 0 : 1;
    } catch (const fedsim::Error& e) {
        std::cerr << "fedsim: " << e.what() << '\n';
        return fedsim::exit_code_for(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "fedsim: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
