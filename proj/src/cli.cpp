#include "treeanova/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "treeanova/parallel.hpp"
#include "treeanova/report.hpp"
#include "treeanova/simulation.hpp"
#include "treeanova/table_io.hpp"

namespace treeanova {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

using nlohmann::json;

double field_number(const json& j, const std::string& name, double fallback,
                    bool required = false) {
    if (!j.contains(name)) {
        if (required) throw ConfigError("field '" + name + "': required");
        return fallback;
    }
    if (!j[name].is_number()) throw ConfigError("field '" + name + "': expected a number");
    return j[name].get<double>();
}

std::vector<double> field_number_array(const json& j, const std::string& name,
                                       bool required) {
    if (!j.contains(name)) {
        if (required) throw ConfigError("field '" + name + "': required");
        return {};
    }
    if (!j[name].is_array()) throw ConfigError("field '" + name + "': expected an array");
    std::vector<double> out;
    for (const auto& item : j[name]) {
        if (!item.is_number()) {
            throw ConfigError("field '" + name + "': expected numeric entries");
        }
        out.push_back(item.get<double>());
    }
    return out;
}

DistributionSpec parse_distribution(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
        throw ConfigError("field 'distribution': expected an object with a 'kind' string");
    }
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "normal") {
        return DistributionSpec::normal(field_number(j, "mean", 0.0),
                                        field_number(j, "variance", 1.0));
    }
    if (kind == "skew-normal") {
        return DistributionSpec::skew_normal(field_number(j, "location", 0.0, true),
                                             field_number(j, "scale", 0.0, true),
                                             field_number(j, "shape", 0.0, true));
    }
    if (kind == "student-t") {
        return DistributionSpec::student_t(field_number(j, "df", 0.0, true));
    }
    if (kind == "laplace") {
        return DistributionSpec::laplace(field_number(j, "location", 0.0, true),
                                         field_number(j, "scale", 0.0, true));
    }
    if (kind == "normal-mixture") {
        if (!j.contains("components") || !j["components"].is_array()) {
            throw ConfigError("field 'components': expected an array of objects");
        }
        std::vector<MixtureComponent> components;
        for (const auto& item : j["components"]) {
            components.push_back({field_number(item, "weight", 0.0, true),
                                  field_number(item, "mean", 0.0, true),
                                  field_number(item, "variance", 0.0, true)});
        }
        return DistributionSpec::normal_mixture(std::move(components));
    }
    if (kind == "exponential") {
        return DistributionSpec::exponential(field_number(j, "rate", 0.0, true));
    }
    throw ConfigError("field 'distribution.kind': unknown kind '" + kind + "'");
}

SimulationSpec parse_simulation_spec(const json& j) {
    if (!j.is_object()) throw ConfigError("cell spec: expected a JSON object");
    SimulationSpec spec;
    spec.mu = field_number_array(j, "mu", true);
    spec.sigma2 = field_number_array(j, "sigma2", true);

    if (!j.contains("n") || !j["n"].is_array()) {
        throw ConfigError("field 'n': expected an array of counts");
    }
    for (const auto& item : j["n"]) {
        if (!item.is_number_unsigned()) {
            throw ConfigError("field 'n': expected non-negative integers");
        }
        spec.n.push_back(item.get<std::size_t>());
    }

    if (j.contains("distribution")) spec.distribution = parse_distribution(j["distribution"]);

    if (j.contains("tests")) {
        if (!j["tests"].is_array()) {
            throw ConfigError("field 'tests': expected an array of test names");
        }
        spec.tests.clear();
        for (const auto& item : j["tests"]) {
            if (!item.is_string()) {
                throw ConfigError("field 'tests': expected strings (lrt, maxd, mind)");
            }
            spec.tests.push_back(parse_test_kind(item.get<std::string>()));
        }
    }

    spec.replications = static_cast<std::size_t>(
        field_number(j, "replications", static_cast<double>(spec.replications)));
    spec.bootstrap_draws = static_cast<std::size_t>(
        field_number(j, "bootstrap", static_cast<double>(spec.bootstrap_draws)));
    spec.alpha = field_number(j, "alpha", spec.alpha);
    spec.seed = Seed(static_cast<std::uint64_t>(field_number(j, "seed", 0.0)));
    spec.c_grid = field_number_array(j, "c_grid", false);
    spec.convergence.tol_exponent =
        static_cast<int>(field_number(j, "tol_exponent", spec.convergence.tol_exponent));
    spec.convergence.max_iterations = static_cast<std::size_t>(field_number(
        j, "max_iterations", static_cast<double>(spec.convergence.max_iterations)));
    return spec;
}

json load_json_file(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        file >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path + "': " + e.what());
    }
    return j;
}

std::vector<TestKind> parse_test_list(const std::string& csv) {
    std::vector<TestKind> tests;
    std::stringstream stream(csv);
    std::string token;
    while (std::getline(stream, token, ',')) {
        if (token.empty()) continue;
        const TestKind kind = parse_test_kind(token);
        if (std::find(tests.begin(), tests.end(), kind) == tests.end()) {
            tests.push_back(kind);
        }
    }
    if (tests.empty()) throw ConfigError("--tests must select at least one test");
    return tests;
}

// Writes through to a file when a path is given, otherwise to `fallback`.
struct OutputTarget {
    std::ofstream file;
    std::ostream* stream = nullptr;

    OutputTarget(const std::string& path, std::ostream& fallback) {
        if (path.empty()) {
            stream = &fallback;
        } else {
            file.open(path);
            if (!file) throw ConfigError("cannot open output file '" + path + "'");
            stream = &file;
        }
    }

    std::ostream& out() { return *stream; }
};

struct TestOptions {
    std::string input;
    std::string control;
    std::string tests = "lrt,maxd,mind";
    std::string format = "text";
    std::string out_path;
    double alpha = 0.05;
    std::size_t bootstrap = 5000;
    std::uint64_t seed = 0;
    int tol_exponent = 6;
    std::size_t max_iterations = 10000;
    int threads = 0;
};

int cmd_test(const TestOptions& options, std::ostream& out) {
    const InputTable table = ingest_csv(options.input, options.control);

    BootstrapConfig boot;
    boot.draws = options.bootstrap;
    boot.alpha = options.alpha;
    boot.seed = Seed(options.seed);
    boot.validate();
    ConvergenceConfig cfg;
    cfg.tol_exponent = options.tol_exponent;
    cfg.max_iterations = options.max_iterations;
    cfg.validate();

    const std::vector<TestKind> tests = parse_test_list(options.tests);
    const int threads = resolve_thread_count(options.threads);

    AnalysisReport report;
    report.labels = table.labels;
    report.stats = summarize(table.data);
    report.condition1 = check_condition1(report.stats);

    const bool want_max = std::count(tests.begin(), tests.end(), TestKind::max_d) > 0;
    const bool want_min = std::count(tests.begin(), tests.end(), TestKind::min_d) > 0;
    std::optional<std::pair<TestReport, TestReport>> d_pair;
    if (want_max && want_min) d_pair = run_maxd_mind(table.data, boot, threads);

    for (TestKind test : tests) {
        switch (test) {
            case TestKind::lrt:
                report.tests.push_back(run_lrt(table.data, boot, cfg, threads));
                break;
            case TestKind::max_d:
                report.tests.push_back(d_pair ? d_pair->first
                                              : run_maxd(table.data, boot, threads));
                break;
            case TestKind::min_d:
                report.tests.push_back(d_pair ? d_pair->second
                                              : run_mind(table.data, boot, threads));
                break;
        }
    }

    OutputTarget target(options.out_path, out);
    if (options.format == "text") {
        write_text_report(target.out(), report);
    } else if (options.format == "json") {
        write_json_report(target.out(), report);
    } else if (options.format == "csv") {
        write_csv_report(target.out(), report);
    } else {
        throw ConfigError("unknown format '" + options.format +
                          "'; expected text, json, or csv");
    }
    return kExitOk;
}

struct SimulateOptions {
    std::string config;
    std::string out_path;
    std::int64_t seed = -1;      // < 0: keep the config's seed
    double alpha = -1.0;         // < 0: keep the config's alpha
    std::int64_t bootstrap = -1; // < 0: keep the config's budget
    int threads = 0;
};

SimulationSpec spec_from_file(const SimulateOptions& options, const json& cell) {
    SimulationSpec spec = parse_simulation_spec(cell);
    if (options.seed >= 0) spec.seed = Seed(static_cast<std::uint64_t>(options.seed));
    if (options.alpha >= 0.0) spec.alpha = options.alpha;
    if (options.bootstrap >= 0) {
        spec.bootstrap_draws = static_cast<std::size_t>(options.bootstrap);
    }
    return spec;
}

bool is_constant(const std::vector<double>& mu) {
    return std::all_of(mu.begin(), mu.end(), [&](double v) { return v == mu.front(); });
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out) {
    const json config = load_json_file(options.config);
    const SimulationSpec spec = spec_from_file(options, config);
    const int threads = resolve_thread_count(options.threads);

    const SimulationResult result = is_constant(spec.mu)
                                        ? estimate_size(spec, threads)
                                        : estimate_power(spec, threads);

    OutputTarget target(options.out_path, out);
    write_csv_header(target.out());
    write_csv_rows(target.out(), spec, result);
    return kExitOk;
}

int cmd_grid(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
    const json config = load_json_file(options.config);
    const json* cells = nullptr;
    if (config.is_array()) {
        cells = &config;
    } else if (config.is_object() && config.contains("cells") &&
               config["cells"].is_array()) {
        cells = &config["cells"];
    } else {
        throw ConfigError("grid config: expected an array of cells or {\"cells\": [...]}");
    }

    std::vector<SimulationSpec> specs;
    for (const auto& cell : *cells) specs.push_back(spec_from_file(options, cell));

    const int threads = resolve_thread_count(options.threads);
    const std::vector<GridCellOutcome> outcomes = run_grid(specs, threads);

    OutputTarget target(options.out_path, out);
    write_csv_header(target.out());
    int exit_code = kExitOk;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (outcomes[i].result) {
            write_csv_rows(target.out(), specs[i], *outcomes[i].result);
            continue;
        }
        err << "cell " << i << ": " << outcomes[i].error << "\n";
        if (exit_code == kExitOk) {
            switch (outcomes[i].category) {
                case ErrorCategory::config: exit_code = kExitConfig; break;
                case ErrorCategory::data: exit_code = kExitData; break;
                default: exit_code = kExitNumeric; break;
            }
        }
    }
    return exit_code;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Parametric-bootstrap tests of equal group means against "
                 "tree-ordered alternatives in heteroscedastic one-way ANOVA"};
    app.name("treeanova");
    app.require_subcommand(1);

    TestOptions test_options;
    auto* test_cmd = app.add_subcommand(
        "test", "Run the selected tests on a long-format CSV dataset");
    test_cmd->add_option("--input", test_options.input, "CSV file (header: group,value)")
        ->required();
    test_cmd->add_option("--control", test_options.control, "Control group label")
        ->required();
    test_cmd->add_option("--alpha", test_options.alpha, "Significance level");
    test_cmd->add_option("--bootstrap", test_options.bootstrap,
                         "Bootstrap resamples per test");
    test_cmd->add_option("--seed", test_options.seed, "Root seed");
    test_cmd->add_option("--tests", test_options.tests,
                         "Comma-separated subset of lrt,maxd,mind");
    test_cmd->add_option("--format", test_options.format, "text, json, or csv");
    test_cmd->add_option("--out", test_options.out_path, "Output file (default stdout)");
    test_cmd->add_option("--tol-exponent", test_options.tol_exponent,
                         "Convergence threshold 10^-p (p >= 3)");
    test_cmd->add_option("--max-iterations", test_options.max_iterations,
                         "Iteration cap for the restricted MLEs");
    test_cmd->add_option("--threads", test_options.threads,
                         "Worker threads (0 = all cores)");

    SimulateOptions simulate_options;
    auto* simulate_cmd = app.add_subcommand(
        "simulate", "Estimate empirical size or power for one configuration");
    simulate_cmd->add_option("--config", simulate_options.config, "JSON cell spec")
        ->required();
    simulate_cmd->add_option("--out", simulate_options.out_path,
                             "Output CSV file (default stdout)");
    simulate_cmd->add_option("--seed", simulate_options.seed,
                             "Root seed override (>= 0)");
    simulate_cmd->add_option("--alpha", simulate_options.alpha,
                             "Significance level override");
    simulate_cmd->add_option("--bootstrap", simulate_options.bootstrap,
                             "Bootstrap resamples override");
    simulate_cmd->add_option("--threads", simulate_options.threads,
                             "Worker threads (0 = all cores)");

    SimulateOptions grid_options;
    auto* grid_cmd =
        app.add_subcommand("grid", "Run a batch of simulation cells to one CSV");
    grid_cmd->add_option("--config", grid_options.config, "JSON file with cells")
        ->required();
    grid_cmd->add_option("--out", grid_options.out_path,
                         "Output CSV file (default stdout)");
    grid_cmd->add_option("--seed", grid_options.seed, "Root seed override (>= 0)");
    grid_cmd->add_option("--alpha", grid_options.alpha, "Significance level override");
    grid_cmd->add_option("--bootstrap", grid_options.bootstrap,
                         "Bootstrap resamples override");
    grid_cmd->add_option("--threads", grid_options.threads,
                         "Worker threads (0 = all cores)");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (test_cmd->parsed()) return cmd_test(test_options, out);
        if (simulate_cmd->parsed()) return cmd_simulate(simulate_options, out);
        if (grid_cmd->parsed()) return cmd_grid(grid_options, out, err);
        err << "error: no subcommand selected\n";
        return kExitConfig;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ParameterError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const UnsupportedMomentsError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}

}  // namespace treeanova
