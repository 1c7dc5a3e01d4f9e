#include <string>

#include <CLI11.hpp>

#include "sill/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"SILL Koopman generator toolkit"};
    app.require_subcommand(1);

    int jobs = 0; // 0 = hardware threads
    app.add_option("--jobs", jobs, "Worker threads for ensembles and sweeps (0 = auto)");

    std::string config_path;
    std::string model_path;
    std::string demo_name;
    std::string outdir;

    auto* fit = app.add_subcommand("fit", "Fit weights and assemble the generator");
    fit->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* simulate =
        app.add_subcommand("simulate", "Integrate reference and lifted trajectories");
    simulate->add_option("model", model_path, "Model file (JSON)")->required();
    simulate->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* sweep = app.add_subcommand("sweep-alpha",
                                     "Pair-error and closure residual per steepness");
    sweep->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* bounds = app.add_subcommand("error-bounds", "Sup-error table and budget report");
    bounds->add_option("model", model_path, "Model file (JSON)")->required();
    bounds->add_option("config", config_path, "Experiment config (JSON)")->required();

    auto* demo = app.add_subcommand("demo", "Write a canned config and run the pipeline");
    demo->add_option("name", demo_name, "Which demo: vdp | toggle")->required();
    demo->add_option("outdir", outdir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (fit->parsed()) return sill::cmd_fit(config_path);
    if (simulate->parsed()) return sill::cmd_simulate(model_path, config_path, jobs);
    if (sweep->parsed()) return sill::cmd_sweep_alpha(config_path, jobs);
    if (bounds->parsed()) return sill::cmd_error_bounds(model_path, config_path);
    if (demo->parsed()) return sill::cmd_demo(demo_name, outdir, jobs);
    return 2;
}
