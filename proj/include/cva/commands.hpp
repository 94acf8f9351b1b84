#pragma once

#include "cva/report.hpp"
#include "cva/run_config.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace cva {

enum class Command { price, cva, table_ctm_dtm, table_collateral, table_wrongway };

std::optional<Command> parse_command(const std::string& name);
const char* command_name(Command c);

/// Values given on the command line; they win over CVA_PATHS / CVA_SEED,
/// which win over the config file.
struct RunOverrides {
    std::optional<std::size_t> paths;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

/// Applies environment and command-line overrides to a loaded config.
/// Malformed environment values raise ConfigError.
void apply_overrides(RunConfig& cfg, const RunOverrides& cli);

/// Report rows of one command.
std::vector<ReportRow> execute(Command command, const RunConfig& cfg);

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_numerical = 3 };

/// Loads the config, runs the command and writes report.csv and meta.txt
/// into out_dir. Diagnostics go to `err`.
int run_command(Command command, const std::string& config_path, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& err, const std::string& dump_cube = "");

} // namespace cva
