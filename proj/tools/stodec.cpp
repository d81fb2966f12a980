// Command-line workbench: seeded experiment runs with CSV output plus a
// summary report over previous runs.

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stodec/harness.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out;
    int trials = 0;
    int parallelism = 0;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "JSON experiment config");
    cmd->add_option("--seed", args.seed, "master seed")->each([&](const std::string&) {
        args.seed_set = true;
    });
    cmd->add_option("--out", args.out, "output CSV path");
    cmd->add_option("--trials", args.trials, "trial count override");
    cmd->add_option("--parallelism", args.parallelism, "worker count");
}

int run_kind(const std::string& kind, const CommonArgs& args) {
    stodec::ExperimentConfig cfg =
        args.config.empty() ? stodec::default_config(kind) : stodec::load_experiment_config(args.config);
    if (cfg.kind != kind) {
        std::cerr << "config kind '" << cfg.kind << "' does not match subcommand '" << kind
                  << "'\n";
        return 2;
    }
    if (args.seed_set) cfg.seed = args.seed;
    if (!args.out.empty()) cfg.out_path = args.out;
    if (args.trials > 0) cfg.trials = args.trials;
    if (args.parallelism > 0) cfg.parallelism = args.parallelism;
    return stodec::run_and_write(cfg, std::cout);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stochastic decision and decoding workbench"};
    app.require_subcommand(1);

    const std::vector<std::string> kinds = {"bounds-sweep", "crng-validate", "sw-sim",
                                            "channel-sim", "gibbs-convergence"};
    std::vector<CommonArgs> args(kinds.size());
    for (std::size_t i = 0; i < kinds.size(); ++i)
        attach_common(app.add_subcommand(kinds[i], "run the " + kinds[i] + " experiment"),
                      args[i]);

    std::vector<std::string> report_paths;
    CLI::App* report_cmd = app.add_subcommand("report", "summarize result CSV files");
    report_cmd->add_option("paths", report_paths, "CSV files to aggregate")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        for (std::size_t i = 0; i < kinds.size(); ++i)
            if (app.got_subcommand(kinds[i])) return run_kind(kinds[i], args[i]);
        if (app.got_subcommand("report")) return stodec::report(report_paths, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
