// Batch front end: cva_engine <command> --config <file> --out <dir>
#include "cva/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Counterparty credit risk valuation"};
    app.require_subcommand(1, 1);

    std::string config;
    std::string out;
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
    std::string dump_cube;

    for (const char* name : {"price", "cva", "table-ctm-dtm", "table-collateral", "table-wrongway"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration (YAML)")->required();
        sub->add_option("--out", out, "output directory")->required();
        sub->add_option("--paths", paths, "Monte-Carlo path count");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--workers", workers, "worker threads (0 = all cores)");
        sub->add_option("--dump-cube", dump_cube, "write the scenario cube to this file");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return cva::exit_config;
    }

    const auto command = cva::parse_command(app.get_subcommands().front()->get_name());
    cva::RunOverrides overrides{paths, seed, workers};
    return cva::run_command(*command, config, out, overrides, std::cerr, dump_cube);
}
