// Command-line front end: validate configs, list experiments, run them.
//
// Exit codes: 0 all checks passed, 1 at least one statistical check failed,
// 2 configuration or usage error, 3 runtime failure inside an experiment.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "kinex/config.hpp"
#include "kinex/error.hpp"
#include "kinex/runner.hpp"

namespace {

struct RunArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<int> threads;
    std::optional<std::string> out;
};

kinex::CliOverrides to_overrides(const RunArgs& a) {
    kinex::CliOverrides o;
    o.seed = a.seed;
    o.trials = a.trials;
    o.threads = a.threads;
    o.out = a.out;
    return o;
}

kinex::ExperimentConfig load(const RunArgs& a) {
    const nlohmann::json tree = kinex::load_config_file(a.config_path);
    return kinex::validate_config(tree, to_overrides(a));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"kinetic wealth-exchange simulation toolkit"};
    app.require_subcommand(1);

    RunArgs args;

    CLI::App* run = app.add_subcommand("run", "run an experiment from a config");
    run->add_option("config", args.config_path, "config file (TOML)")
        ->required();
    run->add_option("--seed", args.seed, "override the base RNG seed");
    run->add_option("--trials", args.trials, "override the trial count");
    run->add_option("--out", args.out, "override the output directory");
    run->add_option("--threads", args.threads, "override the worker count");

    CLI::App* validate =
        app.add_subcommand("validate", "check a config without running it");
    validate->add_option("config", args.config_path, "config file (TOML)")
        ->required();

    app.add_subcommand("list", "list available experiments");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (app.got_subcommand("list")) {
            std::cout << kinex::list_experiments_text();
            return 0;
        }
        if (app.got_subcommand("validate")) {
            const kinex::ExperimentConfig cfg = load(args);
            std::cout << kinex::validate_report(cfg);
            return 0;
        }
        const kinex::ExperimentConfig cfg = load(args);
        const kinex::RunResult rr = kinex::run_experiment(cfg);
        std::cout << "experiment '" << kinex::experiment_name(cfg.experiment)
                  << "': " << (rr.pass ? "pass" : "FAIL") << "\n"
                  << "summary: " << rr.summary_path << "\n"
                  << "results: " << rr.results_path << "\n";
        if (!rr.histogram_path.empty()) {
            std::cout << "histogram: " << rr.histogram_path << "\n";
        }
        return rr.pass ? 0 : 1;
    } catch (const kinex::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code() == kinex::errc::config_error ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
