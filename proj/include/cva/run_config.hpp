#pragma once

#include "cva/errors.hpp"
#include "cva/lattice_pricer.hpp"
#include "cva/portfolio_pipeline.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cva {

/// Malformed or inconsistent run configuration; the message carries the
/// line and the dotted field path.
class ConfigError : public InputError {
public:
    ConfigError(int line, const std::string& field, const std::string& what);
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

struct NamedSchedule {
    std::string label;
    CashflowSchedule schedule;
};

struct WrongWaySweep {
    std::string factor_a;
    std::string factor_b;
    std::vector<double> values;
};

struct SweepSpec {
    std::vector<double> h_b;
    std::vector<double> h_a;
    std::optional<WrongWaySweep> wrongway;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t paths = 1000;
    std::size_t workers = 0;

    ModelRegime regime;
    double lattice_dt = 1.0 / 365.0;
    double rho = 0.0;
    CrossTermForm cross_term = CrossTermForm::a_indexed;
    RecoveryProfile recovery;

    TermStructure discount = TermStructure::flat(0.0, 100.0, CurveKind::interest);
    TermStructure hazard_a = TermStructure::flat(0.0, 100.0, CurveKind::hazard);
    TermStructure hazard_b = TermStructure::flat(0.0, 100.0, CurveKind::hazard);

    std::vector<NamedSchedule> schedules;

    std::optional<TimeBucketGrid> grid;
    std::vector<ProcessSpec> processes;
    CorrelationSpec correlation;
    Portfolio portfolio;
    std::optional<MarginAgreement> margin;
    RegressionSpec regression;
    SweepSpec sweep;

    /// Monte-Carlo job for the portfolio section; ConfigError if the config
    /// has no grid or portfolio.
    MonteCarloJob monte_carlo_job() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

} // namespace cva
