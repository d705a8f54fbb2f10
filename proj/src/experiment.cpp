#include "fedsim/experiment.hpp"

#include "fedsim/diagnostics.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/text.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace fedsim {

namespace fs = std::filesystem;

namespace {

// Independent sub-seeds so changing one consumer never shifts another.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) { return mix_seed({seed, tag}); }

constexpr std::uint64_t tag_data = 1;
constexpr std::uint64_t tag_server = 2;
constexpr std::uint64_t tag_partition = 3;
constexpr std::uint64_t tag_init = 4;

std::string join_ids(const std::vector<std::size_t>& ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i)
        out += (i ? ";" : "") + std::to_string(ids[i]);
    return out;
}

std::string join_strings(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i)
        out += (i ? ";" : "") + items[i];
    return out;
}

std::string opt_double(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
        throw IoError("cannot write " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

Simulation prepare_simulation(const ExperimentConfig& config) {
    config.validate();
    const auto seed = config.train.seed;

    std::optional<LabeledDataset> pool;
    std::optional<LabeledDataset> test;
    if (config.dataset == DatasetSource::synthetic) {
        SyntheticSpec spec{config.num_classes, config.samples_per_class, config.input_dim, config.cluster_spread,
                           sub_seed(seed, tag_data)};
        pool = generate_synthetic(spec);
        if (config.test_per_class > 0)
            test = generate_synthetic_holdout(spec, config.test_per_class);
    } else {
        pool = load_csv(config.data_path);
        if (!config.test_path.empty()) {
            test = load_csv(config.test_path);
            if (test->num_classes() != pool->num_classes() || test->input_dim() != pool->input_dim())
                throw DataError("test set " + config.test_path + " has a different label set or width than " +
                                config.data_path);
        }
    }

    auto split = build_server_set(*pool, config.per_class, sub_seed(seed, tag_server));
    auto partition = dirichlet_partition(split.remainder, config.clients, config.beta, sub_seed(seed, tag_partition));

    std::vector<ClientState> clients;
    clients.reserve(partition.num_clients());
    for (std::size_t k = 0; k < partition.num_clients(); ++k)
        clients.push_back(ClientState{k, split.remainder.subset(partition.client_indices[k])});

    ModelArch arch;
    arch.layer_widths.push_back(pool->input_dim());
    for (auto w : config.hidden)
        arch.layer_widths.push_back(w);
    arch.layer_widths.push_back(static_cast<std::size_t>(pool->num_classes()));
    auto initial = init_model(arch, sub_seed(seed, tag_init));

    return Simulation{std::move(*pool), std::move(test),     std::move(split), std::move(partition),
                      std::move(clients), std::move(arch), std::move(initial)};
}

std::string format_round_row(const RoundRecord& r) {
    std::string row = std::to_string(r.round);
    row += ',' + join_ids(r.selected);
    row += ',' + format_double(r.mean_local_loss);
    row += ',' + format_double(r.global_acc_server);
    row += ',' + opt_double(r.global_acc_test);
    row += ',' + join_doubles(r.weights, ';');
    row += ',' + join_strings(r.flags);
    return row;
}

namespace {

RunResult execute(const ExperimentConfig& config, const fs::path* dir) {
    auto sim = prepare_simulation(config);
    auto server = ServerState::start(sim.initial, sim.split.server, sim.clients.size());

    RunResult result;
    result.initial_acc_server = server.global_acc_server;
    if (sim.test_set)
        result.initial_acc_test = evaluate_accuracy(sim.initial, *sim.test_set);

    const bool diagnostics = config.instrument_global_loss || config.emit_dissimilarity;
    std::ofstream rounds_csv;
    std::ofstream diag_csv;
    if (dir) {
        fs::create_directories(*dir);
        write_text(*dir / "config.resolved", render_config(config));
        write_partition_manifest(sim.partition, *dir / "partition.txt", sim.split.remainder_indices);
        std::string server_line;
        for (std::size_t i = 0; i < sim.split.server.source_indices.size(); ++i)
            server_line += (i ? "," : "") + std::to_string(sim.split.server.source_indices[i]);
        write_text(*dir / "server_set.txt", server_line + "\n");
        rounds_csv.open(*dir / "rounds.csv", std::ios::binary);
        if (!rounds_csv)
            throw IoError("cannot write " + (*dir / "rounds.csv").string());
        rounds_csv << round_csv_header << '\n';
        if (diagnostics) {
            diag_csv.open(*dir / "diagnostics.csv", std::ios::binary);
            diag_csv << "round,global_loss_before,global_loss_after,grad_norm_sq,implied_rate,max_accuracy_B,"
                        "grad_dissimilarity\n";
        }
    }

    RoundOptions options;
    options.test_set = sim.test_set ? &*sim.test_set : nullptr;
    options.instrument_global_loss = config.instrument_global_loss;
    options.emit_dissimilarity = config.emit_dissimilarity;
    options.threads = config.threads;

    for (std::size_t t = 0; t < config.train.rounds; ++t) {
        auto record = run_round(server, sim.clients, config.strategy, config.train, options);
        if (dir) {
            rounds_csv << format_round_row(record) << '\n';
            if (diagnostics) {
                std::optional<double> before, after, gsq, rate, max_b;
                if (record.objective_before && record.objective_after) {
                    const auto d = make_descent_record(record.round, record.objective_before->loss,
                                                       record.objective_after->loss,
                                                       record.objective_before->grad_norm_sq);
                    before = d.loss_before;
                    after = d.loss_after;
                    gsq = d.grad_norm_sq;
                    rate = d.implied_rate;
                }
                if (!record.accuracy_dissimilarity.empty()) {
                    double m = 0.0;
                    for (double b : record.accuracy_dissimilarity)
                        m = std::max(m, b);
                    max_b = m;
                }
                diag_csv << record.round << ',' << opt_double(before) << ',' << opt_double(after) << ','
                         << opt_double(gsq) << ',' << opt_double(rate) << ',' << opt_double(max_b) << ','
                         << opt_double(record.gradient_dissimilarity) << '\n';
            }
        }
        result.records.push_back(std::move(record));
    }
    result.final_model = server.global;

    if (dir) {
        rounds_csv.close();
        if (!rounds_csv)
            throw IoError("write failed for " + (*dir / "rounds.csv").string());
        save_checkpoint(result.final_model, *dir / "model.bin");

        nlohmann::ordered_json manifest;
        nlohmann::ordered_json cfg;
        const auto rendered = render_config(config);
        for (auto line : split(rendered, '\n')) {
            const auto eq = line.find('=');
            if (eq != std::string_view::npos)
                cfg[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
        }
        manifest["config"] = cfg;
        manifest["seeds"] = {{"master", config.train.seed},
                             {"data", sub_seed(config.train.seed, tag_data)},
                             {"server_set", sub_seed(config.train.seed, tag_server)},
                             {"partition", sub_seed(config.train.seed, tag_partition)},
                             {"init", sub_seed(config.train.seed, tag_init)}};
        manifest["partition_redraws"] = sim.partition.redraws;
        std::vector<std::size_t> sizes;
        for (const auto& c : sim.clients)
            sizes.push_back(c.data.size());
        manifest["client_sizes"] = sizes;
        manifest["server_set_size"] = sim.split.server.data.size();
        manifest["arch"] = sim.arch.to_string();
        manifest["initial_acc_server"] = format_double(result.initial_acc_server);
        manifest["initial_acc_test"] = opt_double(result.initial_acc_test);
        manifest["rounds_completed"] = result.records.size();
        write_text(*dir / "manifest.json", manifest.dump(2) + "\n");
        result.dir = *dir;
    }
    return result;
}

} // namespace

RunResult run_experiment(const ExperimentConfig& config) {
    const fs::path dir = config.output_dir;
    return execute(config, &dir);
}

RunResult simulate(const ExperimentConfig& config) {
    return execute(config, nullptr);
}

std::pair<double, double> mean_and_sample_std(const std::vector<double>& values) {
    if (values.empty())
        return {std::nan(""), std::nan("")};
    double mean = 0.0;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() < 2)
        return {mean, std::nan("")};
    double ss = 0.0;
    for (double v : values)
        ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

SweepResult run_sweep(const ExperimentConfig& config) {
    config.validate();
    SweepResult sweep;
    sweep.seeds = config.seeds.empty() ? std::vector<std::uint64_t>{config.train.seed} : config.seeds;
    const fs::path root = config.output_dir;
    fs::create_directories(root);

    std::vector<ExperimentConfig> configs;
    for (auto s : sweep.seeds) {
        auto c = config;
        c.train.seed = s;
        c.seeds.clear();
        c.output_dir = (root / ("seed_" + std::to_string(s))).string();
        configs.push_back(std::move(c));
    }
    sweep.runs.resize(configs.size());
    parallel_for(configs.size(), config.threads, [&](std::size_t i) {
        auto c = configs[i];
        c.threads = 1;
        sweep.runs[i] = run_experiment(c);
    });

    std::string summary = "seed,final_acc_test,final_acc_server\n";
    std::vector<double> tests;
    std::vector<double> servers;
    for (std::size_t i = 0; i < sweep.runs.size(); ++i) {
        const auto& run = sweep.runs[i];
        const double test = run.records.empty() ? run.initial_acc_test.value_or(std::nan(""))
                                                : run.records.back().global_acc_test.value_or(std::nan(""));
        const double server = run.records.empty() ? run.initial_acc_server : run.records.back().global_acc_server;
        tests.push_back(test);
        servers.push_back(server);
        summary += std::to_string(sweep.seeds[i]) + ',' + format_double(test) + ',' + format_double(server) + '\n';
    }
    const auto [mt, st] = mean_and_sample_std(tests);
    const auto [ms, ss] = mean_and_sample_std(servers);
    summary += "mean," + format_double(mt) + ',' + format_double(ms) + '\n';
    summary += "stddev," + format_double(st) + ',' + format_double(ss) + '\n';
    sweep.summary_path = root / "sweep_summary.csv";
    write_text(sweep.summary_path, summary);
    sweep.mean_final_acc_test = mt;
    sweep.std_final_acc_test = st;
    return sweep;
}

namespace {

std::string run_label(const fs::path& dir) {
    auto s = dir.generic_string();
    while (s.size() > 1 && s.back() == '/')
        s.pop_back();
    return s;
}

std::string run_strategy(const fs::path& dir) {
    const auto resolved = dir / "config.resolved";
    if (!fs::exists(resolved))
        return "unknown";
    const auto text = read_text(resolved);
    return std::string(to_string(parse_config_text(text, resolved.string()).strategy.strategy));
}

} // namespace

void write_plot_data(const std::vector<fs::path>& run_dirs, std::ostream& out) {
    static const std::vector<std::string> metrics = {"mean_local_loss", "global_acc_server", "global_acc_test"};
    out << "round,run,strategy,metric,value\n";
    for (const auto& dir : run_dirs) {
        const auto history = read_round_csv(dir / "rounds.csv");
        std::vector<std::size_t> cols;
        std::string missing;
        for (const auto& m : metrics) {
            try {
                cols.push_back(history.column(m));
            } catch (const DataError&) {
                missing += (missing.empty() ? "" : ", ") + m;
            }
        }
        if (!missing.empty())
            throw DataError((dir / "rounds.csv").string() + " lacks columns: " + missing);
        const auto round_col = history.column("round");
        const auto label = run_label(dir);
        const auto strategy = run_strategy(dir);
        for (const auto& row : history.rows)
            for (std::size_t m = 0; m < metrics.size(); ++m)
                out << row[round_col] << ',' << label << ',' << strategy << ',' << metrics[m] << ',' << row[cols[m]]
                    << '\n';
    }
}

std::vector<CompareRow> compare_runs(const std::vector<fs::path>& run_dirs, std::optional<double> target,
                                     double* resolved_target) {
    if (run_dirs.empty())
        throw ConfigError("compare needs at least one run directory");
    std::vector<RoundHistory> histories;
    for (const auto& dir : run_dirs)
        histories.push_back(read_round_csv(dir / "rounds.csv"));
    if (!target) {
        const auto acc = histories.front().numeric_column("global_acc_test");
        if (acc.empty())
            throw DataError(run_label(run_dirs.front()) + " has no rounds to define a target accuracy");
        target = acc.back();
    }
    if (resolved_target)
        *resolved_target = *target;
    const auto baseline = rounds_to_target(histories.front(), *target);
    std::vector<CompareRow> rows;
    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
        const auto r = rounds_to_target(histories[i], *target);
        rows.push_back({run_label(run_dirs[i]), run_strategy(run_dirs[i]), r, speedup(baseline, r)});
    }
    return rows;
}

std::string format_compare_table(const std::vector<CompareRow>& rows, double target) {
    std::ostringstream out;
    out << "target test accuracy: " << format_double(target) << "\n";
    std::size_t width = 6;
    for (const auto& r : rows)
        width = std::max(width, r.run.size() + r.strategy.size() + 3);
    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    out << pad("Method", width) << "  " << pad("#rounds", 8) << "  speedup\n";
    for (const auto& r : rows) {
        const std::string name = r.strategy + " (" + r.run + ")";
        out << pad(name, width) << "  " << pad(r.rounds ? std::to_string(*r.rounds) : "\\", 8) << "  "
            << format_speedup(r.speedup) << "\n";
    }
    return out.str();
}

} // namespace fedsim
