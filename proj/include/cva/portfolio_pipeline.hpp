#pragma once

#include "cva/cashflow_engine.hpp"
#include "cva/collateral_engine.hpp"
#include "cva/scenario_engine.hpp"
#include "cva/xva_engine.hpp"

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace cva {

/// Everything needed for one Monte-Carlo valuation. Deterministic curves
/// stand in for any of rate / hazard_a / hazard_b not simulated.
struct MonteCarloJob {
    std::vector<ProcessSpec> processes;
    CorrelationSpec correlation;
    TimeBucketGrid grid;
    std::size_t paths = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    TermStructure discount = TermStructure::flat(0.0, 1.0, CurveKind::interest);
    TermStructure hazard_a = TermStructure::flat(0.0, 1.0, CurveKind::hazard);
    TermStructure hazard_b = TermStructure::flat(0.0, 1.0, CurveKind::hazard);
    Portfolio portfolio;
    std::optional<MarginAgreement> margin;
    XvaInputs xva;
};

struct MonteCarloResult {
    PortfolioValuation valuation;
    Estimate cva;
};

/// Simulates once, buckets the portfolio once, then values it under any
/// number of margin agreements on the same scenarios.
class PortfolioPipeline {
public:
    explicit PortfolioPipeline(const MonteCarloJob& job);

    const ScenarioCube& cube() const noexcept { return *cube_; }
    const BucketedCashflows& flows() const noexcept { return *flows_; }

    MonteCarloResult value(const std::optional<MarginAgreement>& margin) const;

private:
    MonteCarloJob job_;
    std::unique_ptr<ScenarioCube> cube_;
    std::unique_ptr<MarketView> market_;
    std::unique_ptr<BucketedCashflows> flows_;
    std::vector<std::size_t> state_;
    mutable std::vector<Eigen::VectorXd> call_values_;
};

MonteCarloResult run_monte_carlo(const MonteCarloJob& job);

} // namespace cva
