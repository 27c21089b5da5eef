#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "susyqm/cli.hpp"

namespace {

struct CommonOpts {
    std::string potential;
    std::string params;
    std::string grid;
    std::string f_list;
    std::size_t levels = 3;
    double tol = 5e-3;
    std::string output;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_f, bool with_levels) {
    cmd->add_option("--potential", o.potential, "catalog entry id")->required();
    cmd->add_option("--params", o.params, "comma-separated name=value list");
    cmd->add_option("--grid", o.grid, "grid override lo:hi:n");
    if (with_f) cmd->add_option("--F", o.f_list, "family constants (reals and 'inf')");
    if (with_levels) cmd->add_option("--levels", o.levels, "number of levels");
    cmd->add_option("--tol", o.tol, "ladder/eigensolver agreement tolerance");
    cmd->add_option("--output", o.output, "write the report here instead of stdout");
    cmd->add_option("--format", o.format, "json or csv (family only)")
        ->check(CLI::IsMember({"json", "csv"}));
}

int finish(const susyqm::cli::CommandResult& res, const std::string& path) {
    if (!path.empty()) {
        std::ofstream f(path, std::ios::binary);
        if (!f) {
            std::cerr << "cannot open output file " << path << "\n";
            return 2;
        }
        f << res.output;
    } else {
        std::cout << res.output;
    }
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"factorizations, partner families and spectra of 1D Schrodinger operators"};
    app.require_subcommand(1);

    CommonOpts opts;
    CLI::App* verify = app.add_subcommand("verify", "Riccati residuals of all shipped factorizations");
    add_common(verify, opts, false, false);
    CLI::App* family = app.add_subcommand("family", "general-solution partner family");
    add_common(family, opts, true, false);
    CLI::App* spectrum = app.add_subcommand("spectrum", "ladder vs finite-difference spectrum");
    add_common(spectrum, opts, false, true);
    CLI::App* sicheck = app.add_subcommand("si-check", "shape-invariance reports and family sweep");
    add_common(sicheck, opts, true, false);
    CLI::App* facts = app.add_subcommand("factorizations", "enumerate derivable factorizations");
    add_common(facts, opts, false, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    susyqm::cli::RunConfig cfg;
    cfg.potential_id = opts.potential;
    cfg.levels = opts.levels;
    cfg.tol = opts.tol;
    cfg.output_path = opts.output;
    cfg.format = (opts.format == "csv") ? susyqm::cli::Format::csv : susyqm::cli::Format::json;
    try {
        if (!opts.params.empty()) cfg.params = susyqm::cli::parse_params(opts.params);
        if (!opts.grid.empty()) cfg.grid_override = susyqm::cli::parse_grid(opts.grid);
        if (!opts.f_list.empty()) cfg.f_list = susyqm::cli::parse_f_list(opts.f_list);
    } catch (const susyqm::ConstraintError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    std::string name;
    if (verify->parsed()) name = "verify";
    if (family->parsed()) name = "family";
    if (spectrum->parsed()) name = "spectrum";
    if (sicheck->parsed()) name = "si-check";
    if (facts->parsed()) name = "factorizations";

    if (cfg.format == susyqm::cli::Format::csv && name != "family") {
        std::cerr << "csv output is only available for the family command\n";
        return 2;
    }

    return finish(susyqm::cli::run_command(name, cfg), cfg.output_path);
}
