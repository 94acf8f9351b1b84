#include "cva/commands.hpp"

#include "cva/errors.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace cva {

std::optional<Command> parse_command(const std::string& name) {
    if (name == "price")
        return Command::price;
    if (name == "cva")
        return Command::cva;
    if (name == "table-ctm-dtm")
        return Command::table_ctm_dtm;
    if (name == "table-collateral")
        return Command::table_collateral;
    if (name == "table-wrongway")
        return Command::table_wrongway;
    return std::nullopt;
}

const char* command_name(Command c) {
    switch (c) {
    case Command::price:
        return "price";
    case Command::cva:
        return "cva";
    case Command::table_ctm_dtm:
        return "table-ctm-dtm";
    case Command::table_collateral:
        return "table-collateral";
    case Command::table_wrongway:
        return "table-wrongway";
    }
    return "?";
}

namespace {

std::uint64_t env_integer(const char* name) {
    const char* raw = std::getenv(name);
    const std::string s = raw ? raw : "";
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw ConfigError(0, name, "environment value '" + s + "' is not a non-negative integer");
    return std::strtoull(s.c_str(), nullptr, 10);
}

std::string threshold_label(const char* name, double v) {
    char buf[64];
    if (std::isinf(v))
        std::snprintf(buf, sizeof buf, "%s=%sinf", name, v < 0 ? "-" : "");
    else if (v == std::floor(v) && std::abs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%s=%.0f", name, v);
    else
        std::snprintf(buf, sizeof buf, "%s=%g", name, v);
    return buf;
}

CreditInputs credit_inputs(const RunConfig& cfg) {
    CreditInputs in;
    in.discount = cfg.discount;
    in.hazard_a = cfg.hazard_a;
    in.hazard_b = cfg.hazard_b;
    in.recovery = cfg.recovery;
    in.rho = cfg.rho;
    in.cross_term = cfg.cross_term;
    return in;
}

void require_schedules(const RunConfig& cfg) {
    if (cfg.schedules.empty())
        throw ConfigError(0, "schedules", "lattice commands need at least one schedule");
}

ReportRow mc_row(std::string label, const MonteCarloResult& r) {
    ReportRow row;
    row.label = std::move(label);
    row.risk_free = r.valuation.risk_free.mean;
    row.risky_dtm = r.valuation.risky.mean;
    row.cva_dtm = r.cva.mean;
    row.standard_error = r.cva.standard_error;
    return row;
}

std::vector<ReportRow> run_price(const RunConfig& cfg) {
    require_schedules(cfg);
    const CreditInputs in = credit_inputs(cfg);
    std::vector<ReportRow> rows;
    for (const auto& s : cfg.schedules) {
        const ValuationResult v =
            price_risky(s.schedule, cfg.regime, in, PricingGrid::uniform(s.schedule, 0.0, cfg.lattice_dt));
        ReportRow row;
        row.label = s.label;
        row.risk_free = v.risk_free;
        if (cfg.regime.timing == Timing::ctm) {
            row.risky_ctm = v.risky;
            row.cva_ctm = v.cva;
        } else {
            row.risky_dtm = v.risky;
            row.cva_dtm = v.cva;
        }
        rows.push_back(row);
    }
    return rows;
}

std::vector<ReportRow> run_ctm_dtm(const RunConfig& cfg) {
    require_schedules(cfg);
    const CreditInputs in = credit_inputs(cfg);
    std::vector<ReportRow> rows;
    for (const auto& s : cfg.schedules) {
        const PricingGrid grid = PricingGrid::uniform(s.schedule, 0.0, cfg.lattice_dt);
        const ValuationResult ctm = price_risky(s.schedule, {cfg.regime.credit_side, Timing::ctm}, in, grid);
        const ValuationResult dtm = price_risky(s.schedule, {cfg.regime.credit_side, Timing::dtm}, in, grid);
        ReportRow row;
        row.label = s.label;
        row.risk_free = ctm.risk_free;
        row.risky_ctm = ctm.risky;
        row.risky_dtm = dtm.risky;
        row.cva_ctm = ctm.cva;
        row.cva_dtm = dtm.cva;
        row.relative_difference = relative_difference(ctm.cva, dtm.cva);
        rows.push_back(row);
    }
    return rows;
}

std::vector<ReportRow> run_collateral(const RunConfig& cfg) {
    if (cfg.sweep.h_b.empty() && cfg.sweep.h_a.empty())
        throw ConfigError(0, "sweep", "table-collateral needs sweep.h_b and/or sweep.h_a");
    const MonteCarloJob job = cfg.monte_carlo_job();
    if (!job.portfolio.netting)
        throw ConfigError(0, "portfolio.netting", "collateral requires a netting agreement");
    const PortfolioPipeline pipeline(job);
    const double zeta = job.grid.margin_period();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<ReportRow> rows;
    for (double h_b : cfg.sweep.h_b)
        rows.push_back(mc_row(threshold_label("H_B", h_b),
                              pipeline.value(MarginAgreement::from_thresholds(-inf, h_b, zeta))));
    for (double h_a : cfg.sweep.h_a)
        rows.push_back(mc_row(threshold_label("H_A", h_a),
                              pipeline.value(MarginAgreement::from_thresholds(h_a, inf, zeta))));
    return rows;
}

std::vector<ReportRow> run_wrongway(const RunConfig& cfg) {
    if (!cfg.sweep.wrongway || cfg.sweep.wrongway->values.empty())
        throw ConfigError(0, "sweep.wrongway", "table-wrongway needs factor_a, factor_b and values");
    const WrongWaySweep& w = *cfg.sweep.wrongway;
    std::vector<ReportRow> rows;
    for (double rho : w.values) {
        MonteCarloJob job = cfg.monte_carlo_job();
        job.correlation = cfg.correlation.with(w.factor_a, w.factor_b, rho);
        char label[128];
        std::snprintf(label, sizeof label, "corr(%s:%s)=%g", w.factor_a.c_str(), w.factor_b.c_str(), rho);
        rows.push_back(mc_row(label, run_monte_carlo(job)));
    }
    return rows;
}

} // namespace

void apply_overrides(RunConfig& cfg, const RunOverrides& cli) {
    if (std::getenv("CVA_PATHS")) {
        cfg.paths = env_integer("CVA_PATHS");
        if (cfg.paths == 0)
            throw ConfigError(0, "CVA_PATHS", "path count must be at least 1");
    }
    if (std::getenv("CVA_SEED"))
        cfg.seed = env_integer("CVA_SEED");
    if (cli.paths) {
        if (*cli.paths == 0)
            throw ConfigError(0, "--paths", "path count must be at least 1");
        cfg.paths = *cli.paths;
    }
    if (cli.seed)
        cfg.seed = *cli.seed;
    if (cli.workers)
        cfg.workers = *cli.workers;
}

std::vector<ReportRow> execute(Command command, const RunConfig& cfg) {
    switch (command) {
    case Command::price:
        return run_price(cfg);
    case Command::table_ctm_dtm:
        return run_ctm_dtm(cfg);
    case Command::cva:
        return {mc_row("portfolio", run_monte_carlo(cfg.monte_carlo_job()))};
    case Command::table_collateral:
        return run_collateral(cfg);
    case Command::table_wrongway:
        return run_wrongway(cfg);
    }
    return {};
}

int run_command(Command command, const std::string& config_path, const std::string& out_dir,
                const RunOverrides& overrides, std::ostream& err, const std::string& dump_cube) {
    const auto started = std::chrono::steady_clock::now();
    try {
        std::string bytes;
        {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) {
                err << "error: config: cannot read '" << config_path << "'\n";
                return exit_config;
            }
            std::ostringstream buf;
            buf << in.rdbuf();
            bytes = buf.str();
        }
        RunConfig cfg = parse_config(bytes);
        apply_overrides(cfg, overrides);

        std::filesystem::create_directories(out_dir);
        if (!dump_cube.empty()) {
            const MonteCarloJob job = cfg.monte_carlo_job();
            write_cube(simulate(job.processes, job.correlation, job.grid, job.paths, job.seed, job.workers),
                       dump_cube);
        }
        const std::vector<ReportRow> rows = execute(command, cfg);
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        emit_report(rows, (std::filesystem::path(out_dir) / "report.csv").string());
        char runtime[32];
        std::snprintf(runtime, sizeof runtime, "%.3f", seconds);
        write_atomically((std::filesystem::path(out_dir) / "meta.txt").string(),
                         render_meta({{"command", command_name(command)},
                                      {"seed", std::to_string(cfg.seed)},
                                      {"paths", std::to_string(cfg.paths)},
                                      {"runtime_seconds", runtime},
                                      {"config_hash", content_hash(bytes)},
                                      {"rows", std::to_string(rows.size())}}));
        return exit_ok;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

} // namespace cva
