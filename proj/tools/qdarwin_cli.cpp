// qdarwin: command-line driver for mutual-information curves, maps and oracle checks

#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"

#include "qdarwin/cli/commands.hpp"

namespace {

using namespace qdarwin::cli;

struct Common {
    std::string config;
    std::string out;
    unsigned workers{0};
    long long seed{-1};
};

SweepConfig resolve(const Common& c, RunOptions& opt) {
    SweepConfig cfg = c.config.empty() ? SweepConfig{} : load_config(c.config);
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    opt.out_dir = c.out.empty() ? cfg.output : c.out;
    opt.workers = c.workers > 0 ? c.workers : std::max(1u, std::thread::hardware_concurrency());
    return cfg;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output directory (overrides the config)");
    sub->add_option("--workers", c.workers, "worker threads (default: hardware concurrency)");
    sub->add_option("--seed", c.seed, "base seed for random orderings")->check(CLI::NonNegativeNumber);
}

void report(const RunReport& r) {
    for (const auto& f : r.files) std::cout << f.string() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Redundancy of which-path information in scattered light"};
    app.require_subcommand(1);
    Common common;

    auto* curve = app.add_subcommand("curve", "I(S,F) versus fragment size for each strategy");
    auto* map = app.add_subcommand("map", "per-atom mutual information over the lattice");
    auto* holevo = app.add_subcommand("holevo", "Holevo, discord and conditional information along a curve");
    auto* oracle = app.add_subcommand("oracle-check", "closed forms against the brute-force state");
    auto* sweep = app.add_subcommand("sweep", "curves, maps and plateau summary for every cell");
    for (auto* s : {curve, map, holevo, oracle, sweep}) add_common(s, common);

    CLI11_PARSE(app, argc, argv);

    try {
        RunOptions opt;
        const SweepConfig cfg = resolve(common, opt);
        if (curve->parsed()) report(cmd_curve(cfg, opt));
        if (map->parsed()) report(cmd_map(cfg, opt));
        if (holevo->parsed()) report(cmd_holevo(cfg, opt));
        if (sweep->parsed()) report(cmd_sweep(cfg, opt));
        if (oracle->parsed()) {
            const auto r = cmd_oracle_check(default_oracle_cases(), opt, std::cout);
            report(r);
            if (!r.ok) return 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
