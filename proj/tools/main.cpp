// kitamp command-line front end.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
// failure, 3 I/O or parse failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "kitamp/errors.hpp"

namespace {

enum Exit { kOk = 0, kValidation = 1, kNumerical = 2, kIo = 3 };

int exit_code(const kitamp::Error& e) {
    if (dynamic_cast<const kitamp::IoError*>(&e)) return kIo;
    if (dynamic_cast<const kitamp::ValidationError*>(&e) || dynamic_cast<const kitamp::StructureError*>(&e) ||
        dynamic_cast<const kitamp::OperatingPointError*>(&e))
        return kValidation;
    return kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace kitamp;

    CLI::App app{"Design, simulation and noise-calibration tools for kinetic-inductance parametric amplifiers"};
    app.require_subcommand(0, 1);

    std::string config_path, out_dir, grid_text, bounds_text;
    std::uint64_t seed = 0;
    bool validate_only = false;
    app.add_option("--config", config_path, "Project configuration (YAML); built-in reference project when omitted");
    app.add_option("--out", out_dir, "Output directory (overrides the config)");
    app.add_option("--seed", seed, "Base random seed for synthetic data");
    app.add_option("--grid", grid_text, "Frequency grid START:STOP:POINTS in Hz");
    app.add_option("--bounds", bounds_text, "Asymmetry bounds lo,hi for fitting");
    app.add_flag("--validate", validate_only, "Validate the configuration and exit");

    auto* validate = app.add_subcommand("validate", "Validate the configuration");
    auto* design = app.add_subcommand("design", "Geometry summary and Bloch dispersion");
    auto* gain = app.add_subcommand("gain", "Coupled-mode gain profile");
    auto* components = app.add_subcommand("components", "Coupler and bias tee S-parameters");
    auto* budget = app.add_subcommand("noise-budget", "Readout chain noise budget");
    auto* synth = app.add_subcommand("synth", "Synthetic junction noise sweeps");
    auto* fit = app.add_subcommand("fit", "Fit junction noise sweeps");
    std::vector<std::string> fit_inputs;
    fit->add_option("inputs", fit_inputs, "Sweep CSV files or directories (default: <out>/synth)");
    for (auto* sub : {validate, design, gain, components, budget, synth, fit}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    try {
        cli::Options opt;
        opt.config = config_path.empty() ? reference_config() : load_config(config_path);
        if (!grid_text.empty()) opt.grid = cli::parse_grid(grid_text);
        if (!bounds_text.empty()) opt.asymmetry = cli::parse_bounds(bounds_text);
        opt.seed = seed;
        opt.out_dir = out_dir.empty() ? opt.config.output_dir : out_dir;
        opt.config.validate();

        if (validate_only || validate->parsed() || app.get_subcommands().empty()) {
            std::cout << "configuration is valid\n";
            return kOk;
        }
        if (design->parsed()) return cli::cmd_design(opt);
        if (gain->parsed()) return cli::cmd_gain(opt);
        if (components->parsed()) return cli::cmd_components(opt);
        if (budget->parsed()) return cli::cmd_noise_budget(opt);
        if (synth->parsed()) return cli::cmd_synth(opt);
        if (fit->parsed()) return cli::cmd_fit(opt, fit_inputs);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kOk;
}
