// Command-line front end: solve, hss, verify and sweep over run configs.

#include "vascutherm/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace vascutherm;

int main(int argc, char** argv)
{
    CLI::App app{"Thermal regulation in thin vascular plates"};
    app.require_subcommand(1);
    std::string output_dir = ".";
    bool quiet = false;
    app.add_option("--output-dir", output_dir, "Directory for output files")->capture_default_str();
    app.add_flag("--quiet", quiet, "Suppress progress messages");

    std::string config_a, config_b;
    auto* solve = app.add_subcommand("solve", "Solve and export field, VTK and metrics");
    solve->add_option("config", config_a, "Run config")->required();
    auto* hss = app.add_subcommand("hss", "Hot steady-state temperature");
    hss->add_option("config", config_a, "Run config")->required();
    auto* verify = app.add_subcommand("verify", "Run the principle oracles");
    verify->add_option("config", config_a, "Run config")->required();
    verify->add_option("second", config_b, "Second config for the comparison check");
    auto* sweep = app.add_subcommand("sweep", "Metrics over a parameter range");
    sweep->add_option("config", config_a, "Run config")->required();
    std::string param;
    std::vector<double> values;
    sweep->add_option("--param", param, "mass_flow_rate, inlet_temperature or f0")->required();
    sweep->add_option("--values", values, "Values in SI units (comma or space separated)")
        ->required()
        ->delimiter(',');

    // Subcommand options may also come after the subcommand.
    for (auto* sub : {solve, hss, verify, sweep}) {
        sub->add_option("--output-dir", output_dir, "Directory for output files");
        sub->add_flag("--quiet", quiet, "Suppress progress messages");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_code::parse;
    }

    RunContext ctx;
    ctx.output_dir = output_dir;
    ctx.log = quiet ? nullptr : &std::cout;
    ctx.warn = &std::cerr;

    RunConfig config;
    std::optional<RunConfig> second;
    try {
        config = load_config(config_a);
        if (!config_b.empty())
            second = load_config(config_b);
        if (app.got_subcommand(solve))
            return run_solve(config, ctx);
        if (app.got_subcommand(hss))
            return run_hss(config, ctx);
        if (app.got_subcommand(verify))
            return run_verify(config, second, ctx);
        return run_sweep(config, param, values, ctx);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
