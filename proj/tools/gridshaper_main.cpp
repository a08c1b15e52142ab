// gridshaper: fleet demand shaping / altering simulator.
//
//   gridshaper gen    --config cfg.json [--seed N] [--out DIR]
//   gridshaper shape  --config cfg.json [--out DIR]
//   gridshaper alter  --config cfg.json [--t0 SLOT] [--lambda L] [--out DIR]
//   gridshaper settle --config cfg.json [--out DIR]
//   gridshaper report --config cfg.json [--out DIR]
//   gridshaper run    --config cfg.json ...   (all of the above in order)

#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "gridshaper/pipeline.hpp"
#include "gridshaper/settlement.hpp"

int main(int argc, char** argv) {
    using namespace gridshaper;

    CLI::App app{"Decentralized PEV demand shaping and altering simulator"};
    app.require_subcommand(1);

    std::string config_path;
    CliOverrides overrides;
    std::uint64_t seed = 0;
    std::size_t t0 = 0;
    double lambda = 0.5;
    std::string out_dir;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
        cmd->add_option("--seed", seed, "Fleet sampling seed (overrides config)");
        cmd->add_option("--t0", t0, "Force altering at this slot, bypassing the trigger rule");
        cmd->add_option("--lambda", lambda, "Shape-tracking weight of the altering objective")
            ->check(CLI::Range(0.0, 1.0));
        cmd->add_option("--out", out_dir, "Run directory (overrides config output_dir)");
    };

    auto* gen = app.add_subcommand("gen", "Sample the fleet and build the DA-purchased target");
    auto* shape = app.add_subcommand("shape", "Run the sequential demand-shaping sweeps");
    auto* alter = app.add_subcommand("alter", "Detect t0 and run the demand-altering sweeps");
    auto* settle_cmd = app.add_subcommand("settle", "Settle every stage against the DA/RT market");
    auto* report = app.add_subcommand("report", "Emit plot-ready long-format series");
    auto* run = app.add_subcommand("run", "gen, shape, alter, settle and report in one go");
    for (auto* cmd : {gen, shape, alter, settle_cmd, report, run}) add_common(cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        auto* active = app.get_subcommands().front();
        if (active->count("--seed")) overrides.seed = seed;
        if (active->count("--t0")) overrides.t0 = t0;
        if (active->count("--lambda")) overrides.lambda = lambda;
        if (active->count("--out")) overrides.output_dir = out_dir;
        const ScenarioConfig config = load_scenario_config(config_path, overrides);

        auto settle_and_print = [&] {
            const CostChainReport r = cmd_settle(config);
            write_key_value(std::cout, r);
        };
        if (active == gen) cmd_gen(config);
        else if (active == shape) cmd_shape(config);
        else if (active == alter) cmd_alter(config);
        else if (active == settle_cmd) settle_and_print();
        else if (active == report) cmd_report(config);
        else {
            cmd_gen(config);
            cmd_shape(config);
            cmd_alter(config);
            settle_and_print();
            cmd_report(config);
        }
    } catch (const std::exception& e) {
        log_message(LogLevel::Error, e.what());
        return 1;
    }
    return 0;
}
