#include <CLI11.hpp>

#include "pinnhs/cli.hpp"

// Command-line front end. Every flag can also be set through a PINNHS_*
// environment variable (e.g. PINNHS_SEED); flags win over the environment.

int main(int argc, char** argv) {
    CLI::App app{"Heat-sink inverse solver: trains subdomain networks on the multilayer "
                 "conduction problem, infers the pipe-to-coolant heat transfer coefficient, "
                 "and back-solves the required coolant velocity."};
    app.require_subcommand(1);

    pinnhs::RunManifest m;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out", m.out_dir, "Output directory")->envname("PINNHS_OUT");
        cmd->add_option("--seed", m.seed, "Base RNG seed")->envname("PINNHS_SEED");
        cmd->add_option("--epochs", m.epochs, "Optimizer step budget")->envname("PINNHS_EPOCHS");
        cmd->add_option("--lr", m.lr, "Learning rate for network parameters")
            ->envname("PINNHS_LR");
        cmd->add_option("--lr-h", m.lr_h, "Learning rate for log h*")->envname("PINNHS_LR_H");
        cmd->add_option("--widths", m.widths, "Subnet layer widths, e.g. 2 32 32 1")
            ->envname("PINNHS_WIDTHS");
        cmd->add_flag("--deterministic,!--no-deterministic", m.deterministic,
                      "Bit-reproducible mode (single-threaded reduction, wall clock zeroed)")
            ->envname("PINNHS_DETERMINISTIC");
        cmd->add_option("--threads", m.threads, "Worker threads for batch evaluation")
            ->envname("PINNHS_THREADS");
    };

    auto* validate = app.add_subcommand("validate", "Run a validation study");
    validate->add_option("--study", m.study, "intro1d | toy_h_sweep | convergence_probe")
        ->required()
        ->envname("PINNHS_STUDY");
    add_common(validate);

    auto* traincase = app.add_subcommand("train-case", "Train one experimental case");
    traincase->add_option("--case", m.case_path, "Case file (JSON)")->required()
        ->envname("PINNHS_CASE");
    traincase->add_option("--geometry", m.geometry_path, "Geometry file (JSON)")
        ->envname("PINNHS_GEOMETRY");
    traincase->add_option("--trials", m.trials, "Seed trials to run and aggregate")
        ->envname("PINNHS_TRIALS");
    traincase->add_option("--schedule", m.schedule, "joint | sequential")
        ->envname("PINNHS_SCHEDULE");
    traincase->add_flag("--with-probes,!--no-probes", m.with_probes,
                        "Include the probe readings as a data term");
    traincase->add_option("--epochs-per-layer", m.epochs_per_layer,
                          "Steps per subnet in a sequential sweep");
    traincase->add_option("--sweeps", m.sweeps, "Sequential sweeps over the subnets");
    traincase->add_option("--lr-lambda", m.lr_lambda, "Self-adaptive weight ascent rate");
    traincase->add_option("--epsilon-stop", m.epsilon_stop, "Total-loss stopping threshold");
    traincase->add_option("--count-divisor", m.count_divisor,
                          "Divide the full-scale collocation counts (default 4)");
    add_common(traincase);

    auto* sweep = app.add_subcommand("sweep", "Toy-plate h recovery sweep");
    add_common(sweep);

    auto* fdcheck = app.add_subcommand("fd-check", "Finite-difference forward solve of a case");
    fdcheck->add_option("--case", m.case_path, "Case file (JSON)")->required();
    fdcheck->add_option("--geometry", m.geometry_path, "Geometry file (JSON)");
    fdcheck->add_option("--htc", m.fd_h, "Heat transfer coefficient to impose, W/m²K");
    fdcheck->add_option("--nx", m.fd_nx, "Grid cells in x");
    fdcheck->add_option("--ny", m.fd_ny, "Grid cells in y");
    add_common(fdcheck);

    auto* compare = app.add_subcommand("compare-modes", "Paired run with and without probe data");
    compare->add_option("--case", m.case_path, "Case file (JSON)")->required();
    compare->add_option("--geometry", m.geometry_path, "Geometry file (JSON)");
    compare->add_option("--trials", m.trials, "Seed trials per mode");
    compare->add_option("--schedule", m.schedule, "joint | sequential");
    compare->add_option("--epochs-per-layer", m.epochs_per_layer,
                        "Steps per subnet in a sequential sweep");
    compare->add_option("--sweeps", m.sweeps, "Sequential sweeps over the subnets");
    compare->add_option("--count-divisor", m.count_divisor,
                        "Divide the full-scale collocation counts (default 4)");
    add_common(compare);

    CLI11_PARSE(app, argc, argv);

    for (auto* cmd : {validate, traincase, sweep, fdcheck, compare}) {
        if (cmd->parsed()) {
            m.command = cmd->get_name();
            break;
        }
    }
    return pinnhs::run(m);
}
