#include <exception>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "intersep/cli.hpp"

int main(int argc, char** argv) {
    using namespace intersep;

    CLI::App app{"interior-separation toolkit: short-time stagnation analysis for "
                 "heat-coupled planar flow"};
    app.set_version_flag("--version", cli::kVersion);
    app.require_subcommand(1);

    cli::PredictOptions pred;
    cli::SimulateOptions sim;
    cli::VerifyOptions ver;

    CLI::App* cmd_pred = app.add_subcommand(
        "predict", "locate and certify the first stagnation birth of the short-time model");
    cmd_pred->add_option("--config", pred.common.config_path, "scenario configuration file")
        ->required();
    cmd_pred->add_option("--out", pred.common.out_dir, "root directory for run outputs");
    cmd_pred->add_flag("--json-only", pred.common.json_only, "suppress CSV side outputs");
    cmd_pred->add_option("--tmax", pred.t_max, "search horizon in scale-free time");

    CLI::App* cmd_sim = app.add_subcommand(
        "simulate", "integrate the coupled equations and track stagnation points");
    cmd_sim->add_option("--config", sim.common.config_path, "scenario configuration file")
        ->required();
    cmd_sim->add_option("--out", sim.common.out_dir, "root directory for run outputs");
    cmd_sim->add_flag("--json-only", sim.common.json_only, "suppress CSV side outputs");
    cmd_sim->add_option("--mode", sim.mode, "velocity update: literal or projected");
    cmd_sim->add_option("--grid", sim.grid, "nodes per axis (>= 16)");
    cmd_sim->add_option("--end-time", sim.end_time, "integration horizon in scale-free time");

    CLI::App* cmd_ver = app.add_subcommand(
        "verify", "cross-check the predicted event time against a direct simulation");
    cmd_ver->add_option("--config", ver.common.config_path, "scenario configuration file")
        ->required();
    cmd_ver->add_option("--out", ver.common.out_dir, "root directory for run outputs");
    cmd_ver->add_flag("--json-only", ver.common.json_only, "suppress CSV side outputs");
    cmd_ver->add_option("--mode", ver.mode, "velocity update: literal or projected");
    cmd_ver->add_option("--grid", ver.grid, "nodes per axis (>= 16)");
    cmd_ver->add_option("--tmax", ver.t_max, "prediction search horizon");
    cmd_ver->add_option("--end-time", ver.end_time,
                        "simulation horizon (default: 1.3 x predicted event time)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cli::kConfigError;
    }

    try {
        if (cmd_pred->parsed()) return cli::cmd_predict(pred);
        if (cmd_sim->parsed()) return cli::cmd_simulate(sim);
        return cli::cmd_verify(ver);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return cli::kNumericalFailure;
    }
}
