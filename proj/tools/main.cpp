#include "commands.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Probability that a significant causal inference survives counterfactual data"};
    app.require_subcommand(1);

    piv::cli::Options opts;
    const auto with_config = [&](CLI::App* cmd) {
        cmd->add_option("--config", opts.config_path, "Analysis config (JSON)")->required();
        cmd->add_flag("--dump-config", opts.dump_config, "Print the parsed config and exit");
    };
    const auto with_format = [&](CLI::App* cmd, const char* help) {
        cmd->add_option("--format", opts.format, help);
    };

    auto* compute = app.add_subcommand("compute", "PIV at a point belief");
    with_config(compute);
    compute->add_option("--belief", opts.belief, "Belief name");
    with_format(compute, "text|json");

    auto* bound = app.add_subcommand("bound", "Bound the PIV over a belief region");
    with_config(bound);
    bound->add_option("--belief", opts.belief, "Belief name");
    with_format(bound, "text|json");

    auto* contour = app.add_subcommand("contour", "Write a PIV grid over a finite region");
    with_config(contour);
    contour->add_option("--belief", opts.belief, "Belief name");
    contour->add_option("--out", opts.out, "Output file");
    contour->add_option("--grid", opts.grid, "Resolution NTxNC");
    with_format(contour, "csv|json");

    auto* power = app.add_subcommand("power", "Null/alternative quantities of the ideal retest");
    with_config(power);
    power->add_option("--belief", opts.belief, "Belief name");
    with_format(power, "text|json");

    auto* replicate = app.add_subcommand("replicate", "Run the built-in retention example");
    replicate->add_option("--out", opts.out, "Plausible-region grid file");
    replicate->add_option("--grid", opts.grid, "Resolution NTxNC (default 200x200)");
    with_format(replicate, "csv|json for the grid file");

    auto* verify = app.add_subcommand("verify", "Run the brute-force oracle checks");
    verify->add_option("--seeds", opts.seeds, "Number of random ideal samples");
    verify->add_option("--reps", opts.reps, "Monte Carlo replications");
    verify->add_option("--seed", opts.seed, "Base RNG seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : piv::cli::kConfigError;
    }

    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
    if (*compute) return piv::cli::compute(opts, out, err);
    if (*bound) return piv::cli::bound(opts, out, err);
    if (*contour) return piv::cli::contour(opts, out, err);
    if (*power) return piv::cli::power(opts, out, err);
    if (*replicate) return piv::cli::replicate(opts, out, err);
    if (*verify) return piv::cli::verify(opts, out, err);
    return piv::cli::kConfigError;
}
