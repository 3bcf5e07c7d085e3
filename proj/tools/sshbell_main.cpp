// Command-line front end. A run is either
//   sshbell <command> --config file.cfg [--out DIR] [--seed N] [--workers N]
// or
//   sshbell --preset NAME [--out DIR] [...]
// where the preset supplies both the command and its config. Exit codes:
// 0 success, 2 configuration error, 3 numerical-tolerance failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "sshbell/commands.hpp"
#include "sshbell/presets.hpp"

int main(int argc, char** argv) {
    CLI::App app{
        "Momentum-space entangled-pair preparation in driven SSH chains: "
        "band tables, time-boundary scattering, decoherence and noise "
        "studies, and analytic parameter maps."};
    std::string command, config_path, preset_name;
    sshbell::CommandContext ctx;
    app.add_option("command", command,
                   "bands | scatter | decohere | noise_sweep | multiband | "
                   "bell_map");
    app.add_option("--config", config_path, "config file (key = value)");
    app.add_option("--preset", preset_name,
                   "named preset supplying command and config");
    app.add_option("--out", ctx.out_dir, "output directory")
        ->default_val(".");
    app.add_option("--seed", ctx.seed, "master seed for stochastic runs")
        ->default_val(1);
    app.add_option("--workers", ctx.workers, "parallel worker count")
        ->default_val(1);
    app.add_flag("--oracle", ctx.oracle,
                 "enable dense cross-check outputs where available");
    CLI11_PARSE(app, argc, argv);

    try {
        sshbell::Config cfg;
        if (!preset_name.empty()) {
            if (!config_path.empty())
                throw sshbell::config_error(
                    "--preset and --config are mutually exclusive");
            const sshbell::Preset& preset = sshbell::find_preset(preset_name);
            if (!command.empty() && command != preset.command)
                throw sshbell::config_error(
                    "preset '" + preset_name + "' runs command '" +
                    preset.command + "', not '" + command + "'");
            command = preset.command;
            cfg = sshbell::Config::parse(preset.text,
                                         "preset:" + preset_name);
        } else {
            if (command.empty())
                throw sshbell::config_error(
                    "no command given (and no --preset)");
            if (!config_path.empty())
                cfg = sshbell::Config::load(config_path);
        }
        return sshbell::run_command(command, cfg, ctx);
    } catch (const sshbell::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const sshbell::tolerance_error& e) {
        std::fprintf(stderr, "numerical tolerance failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
