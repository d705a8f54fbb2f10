#include "fedsim/config.hpp"

#include "fedsim/errors.hpp"
#include "fedsim/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace fedsim {

namespace {

struct Field {
    std::string key;
    std::function<bool(ExperimentConfig&, std::string_view)> parse;  // false on type mismatch
    std::function<std::string(const ExperimentConfig&)> render;
    const char* expects;
};

bool set_size(std::size_t& out, std::string_view v) {
    const auto x = parse_int(v);
    if (!x || *x < 0)
        return false;
    out = static_cast<std::size_t>(*x);
    return true;
}

bool set_u64(std::uint64_t& out, std::string_view v) {
    v = trim(v);
    std::uint64_t x = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
        return false;
    out = x;
    return true;
}

bool set_double(double& out, std::string_view v) {
    const auto x = parse_double(v);
    if (!x)
        return false;
    out = *x;
    return true;
}

bool set_bool(bool& out, std::string_view v) {
    v = trim(v);
    if (v == "true" || v == "1" || v == "yes") {
        out = true;
        return true;
    }
    if (v == "false" || v == "0" || v == "no") {
        out = false;
        return true;
    }
    return false;
}

template <typename T>
bool set_list(std::vector<T>& out, std::string_view v, bool (*one)(T&, std::string_view)) {
    out.clear();
    v = trim(v);
    if (v.empty())
        return true;
    for (auto cell : split(v, ',')) {
        T x{};
        if (!one(x, cell))
            return false;
        out.push_back(x);
    }
    return true;
}

template <typename T>
std::string render_list(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out += (i ? "," : "") + std::to_string(values[i]);
    return out;
}

const std::vector<Field>& fields() {
    using C = ExperimentConfig;
    static const std::vector<Field> table = {
        {"dataset",
         [](C& c, std::string_view v) {
             v = trim(v);
             if (v == "synthetic")
                 c.dataset = DatasetSource::synthetic;
             else if (v == "csv")
                 c.dataset = DatasetSource::csv;
             else
                 return false;
             return true;
         },
         [](const C& c) { return std::string(c.dataset == DatasetSource::csv ? "csv" : "synthetic"); },
         "'synthetic' or 'csv'"},
        {"data_path", [](C& c, std::string_view v) { c.data_path = std::string(trim(v)); return true; },
         [](const C& c) { return c.data_path; }, "a path"},
        {"test_path", [](C& c, std::string_view v) { c.test_path = std::string(trim(v)); return true; },
         [](const C& c) { return c.test_path; }, "a path"},
        {"num_classes",
         [](C& c, std::string_view v) {
             const auto x = parse_int(v);
             if (!x || *x > 1'000'000 || *x < -1'000'000)
                 return false;
             c.num_classes = static_cast<int>(*x);
             return true;
         },
         [](const C& c) { return std::to_string(c.num_classes); }, "an integer"},
        {"samples_per_class", [](C& c, std::string_view v) { return set_size(c.samples_per_class, v); },
         [](const C& c) { return std::to_string(c.samples_per_class); }, "a nonnegative integer"},
        {"input_dim", [](C& c, std::string_view v) { return set_size(c.input_dim, v); },
         [](const C& c) { return std::to_string(c.input_dim); }, "a nonnegative integer"},
        {"cluster_spread", [](C& c, std::string_view v) { return set_double(c.cluster_spread, v); },
         [](const C& c) { return format_double(c.cluster_spread); }, "a number"},
        {"test_per_class", [](C& c, std::string_view v) { return set_size(c.test_per_class, v); },
         [](const C& c) { return std::to_string(c.test_per_class); }, "a nonnegative integer"},
        {"hidden", [](C& c, std::string_view v) { return set_list<std::size_t>(c.hidden, v, set_size); },
         [](const C& c) { return render_list(c.hidden); }, "a comma-separated list of widths"},
        {"clients", [](C& c, std::string_view v) { return set_size(c.clients, v); },
         [](const C& c) { return std::to_string(c.clients); }, "a nonnegative integer"},
        {"beta", [](C& c, std::string_view v) { return set_double(c.beta, v); },
         [](const C& c) { return format_double(c.beta); }, "a number"},
        {"per_class", [](C& c, std::string_view v) { return set_size(c.per_class, v); },
         [](const C& c) { return std::to_string(c.per_class); }, "a nonnegative integer"},
        {"strategy",
         [](C& c, std::string_view v) {
             const auto s = parse_strategy(trim(v));
             if (!s)
                 return false;
             c.strategy.strategy = *s;
             return true;
         },
         [](const C& c) { return std::string(to_string(c.strategy.strategy)); },
         "one of fedavg, fedprox, fedpdc, fedpdc_adaptive"},
        {"lambda", [](C& c, std::string_view v) { return set_double(c.strategy.lambda, v); },
         [](const C& c) { return format_double(c.strategy.lambda); }, "a number"},
        {"mu_prox", [](C& c, std::string_view v) { return set_double(c.strategy.mu_prox, v); },
         [](const C& c) { return format_double(c.strategy.mu_prox); }, "a number"},
        {"penalty_mode",
         [](C& c, std::string_view v) {
             const auto m = parse_penalty_mode(trim(v));
             if (!m)
                 return false;
             c.strategy.penalty_mode = *m;
             return true;
         },
         [](const C& c) { return std::string(to_string(c.strategy.penalty_mode)); }, "'literal' or 'scaled_ce'"},
        {"tau", [](C& c, std::string_view v) { return set_double(c.strategy.tau, v); },
         [](const C& c) { return format_double(c.strategy.tau); }, "a number"},
        {"local_epochs", [](C& c, std::string_view v) { return set_size(c.train.local_epochs, v); },
         [](const C& c) { return std::to_string(c.train.local_epochs); }, "a nonnegative integer"},
        {"batch_size", [](C& c, std::string_view v) { return set_size(c.train.batch_size, v); },
         [](const C& c) { return std::to_string(c.train.batch_size); }, "a nonnegative integer"},
        {"lr", [](C& c, std::string_view v) { return set_double(c.train.lr, v); },
         [](const C& c) { return format_double(c.train.lr); }, "a number"},
        {"momentum", [](C& c, std::string_view v) { return set_double(c.train.momentum, v); },
         [](const C& c) { return format_double(c.train.momentum); }, "a number"},
        {"weight_decay", [](C& c, std::string_view v) { return set_double(c.train.weight_decay, v); },
         [](const C& c) { return format_double(c.train.weight_decay); }, "a number"},
        {"rounds", [](C& c, std::string_view v) { return set_size(c.train.rounds, v); },
         [](const C& c) { return std::to_string(c.train.rounds); }, "a nonnegative integer"},
        {"seed", [](C& c, std::string_view v) { return set_u64(c.train.seed, v); },
         [](const C& c) { return std::to_string(c.train.seed); }, "a nonnegative integer"},
        {"seeds", [](C& c, std::string_view v) { return set_list<std::uint64_t>(c.seeds, v, set_u64); },
         [](const C& c) { return render_list(c.seeds); }, "a comma-separated list of seeds"},
        {"output_dir", [](C& c, std::string_view v) { c.output_dir = std::string(trim(v)); return true; },
         [](const C& c) { return c.output_dir; }, "a path"},
        {"instrument_global_loss", [](C& c, std::string_view v) { return set_bool(c.instrument_global_loss, v); },
         [](const C& c) { return std::string(c.instrument_global_loss ? "true" : "false"); }, "true or false"},
        {"emit_dissimilarity", [](C& c, std::string_view v) { return set_bool(c.emit_dissimilarity, v); },
         [](const C& c) { return std::string(c.emit_dissimilarity ? "true" : "false"); }, "true or false"},
        {"threads", [](C& c, std::string_view v) { return set_size(c.threads, v); },
         [](const C& c) { return std::to_string(c.threads); }, "a nonnegative integer"},
    };
    return table;
}

bool finite_positive(double v) { return v > 0.0 && std::isfinite(v); }
bool finite_nonnegative(double v) { return v >= 0.0 && std::isfinite(v); }

// Throws naming `key` and, when known, the line that set it.
[[noreturn]] void reject(const std::map<std::string, std::size_t>& lines, const std::string& source,
                         const std::string& key, const std::string& why) {
    std::string where = source;
    if (auto it = lines.find(key); it != lines.end())
        where += ":" + std::to_string(it->second);
    throw ConfigError(where + ": " + key + " " + why);
}

void validate_with_lines(const ExperimentConfig& c, const std::map<std::string, std::size_t>& lines,
                         const std::string& source) {
    auto fail = [&](const std::string& key, const std::string& why) { reject(lines, source, key, why); };

    if (c.dataset == DatasetSource::csv) {
        if (c.data_path.empty())
            fail("data_path", "is required when dataset = csv");
    } else {
        if (c.num_classes < 1)
            fail("num_classes", "must be >= 1");
        if (c.samples_per_class < 1)
            fail("samples_per_class", "must be >= 1");
        if (c.input_dim < 1)
            fail("input_dim", "must be >= 1");
        if (!finite_nonnegative(c.cluster_spread))
            fail("cluster_spread", "must be a finite number >= 0");
        if (c.samples_per_class <= c.per_class)
            fail("per_class", "must be smaller than samples_per_class so clients keep data");
    }
    for (auto w : c.hidden)
        if (w < 1)
            fail("hidden", "widths must be >= 1");
    if (c.clients < 1)
        fail("clients", "must be >= 1");
    if (!finite_positive(c.beta))
        fail("beta", "must be a finite number > 0");
    if (c.per_class < 1)
        fail("per_class", "must be >= 1");
    if (!(c.strategy.tau > 0.0 && c.strategy.tau <= 1.0))
        fail("tau", "must lie in (0, 1]");
    if (!finite_nonnegative(c.strategy.lambda))
        fail("lambda", "must be a finite number >= 0");
    if (!finite_nonnegative(c.strategy.mu_prox))
        fail("mu_prox", "must be a finite number >= 0");
    if (c.train.batch_size < 1)
        fail("batch_size", "must be >= 1");
    if (!finite_nonnegative(c.train.lr))
        fail("lr", "must be a finite number >= 0");
    if (!(c.train.momentum >= 0.0 && c.train.momentum < 1.0))
        fail("momentum", "must lie in [0, 1)");
    if (!finite_nonnegative(c.train.weight_decay))
        fail("weight_decay", "must be a finite number >= 0");
    if (c.output_dir.empty())
        fail("output_dir", "must not be empty");
    if (c.threads < 1)
        fail("threads", "must be >= 1");
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> out;
        for (const auto& f : fields())
            out.push_back(f.key);
        return out;
    }();
    return keys;
}

void ExperimentConfig::validate() const {
    validate_with_lines(*this, {}, "config");
}

ExperimentConfig parse_config_text(std::string_view text, const std::string& source) {
    ExperimentConfig config;
    std::map<std::string, std::size_t> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        const auto& table = fields();
        auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end())
            throw ConfigError(source + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        if (lines.count(key))
            throw ConfigError(source + ":" + std::to_string(line_no) + ": key '" + key + "' repeated (first set on line " +
                              std::to_string(lines[key]) + ")");
        lines[key] = line_no;
        if (!it->parse(config, value))
            throw ConfigError(source + ":" + std::to_string(line_no) + ": " + key + " expects " + it->expects +
                              ", got '" + std::string(value) + "'");
    }
    validate_with_lines(config, lines, source);
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.string());
}

std::string render_config(const ExperimentConfig& config) {
    std::string out;
    for (const auto& f : fields())
        out += f.key + " = " + f.render(config) + "\n";
    return out;
}

} // namespace fedsim
