// Command-line front end: criteria, validate, design, refine.
#include <iostream>

#include <CLI11.hpp>

#include "hoed/cli/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian optimal design for linear Gaussian inverse problems"};
    app.set_version_flag("--version", hoed::cli::kVersion);
    app.require_subcommand(1);

    hoed::cli::RunOptions opts;
    std::string out_dir;
    std::uint64_t seed = 0;

    const auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("-c,--config", opts.config_path, "experiment config (JSON)")->required();
        sub->add_option("-o,--out", out_dir, "output directory (overrides config)");
        sub->add_option("-s,--seed", seed, "master seed (overrides config)");
        sub->add_option("-j,--threads", opts.threads, "worker threads for Monte Carlo")->check(CLI::PositiveNumber);
        return sub;
    };
    add("criteria", "closed-form D and A criteria with the spectral summary");
    add("validate", "cross-check every closed form against Monte Carlo and dense oracles");
    add("design", "greedy sensor selection, checked against exhaustive search when small");
    add("refine", "criteria across a sequence of grid refinements");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hoed::cli::kConfigFailure;
    }

    opts.command = app.get_subcommands().front()->get_name();
    const auto* sub = app.get_subcommands().front();
    if (sub->count("--out") > 0) {
        opts.out_dir = out_dir;
    }
    if (sub->count("--seed") > 0) {
        opts.seed = seed;
    }
    return hoed::cli::run(opts, std::cout, std::cerr);
}
