#pragma once

#include "cva/cashflow_engine.hpp"
#include "cva/collateral_engine.hpp"
#include "cva/default_model.hpp"
#include "cva/regression.hpp"
#include "cva/risky_discounting.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cva {

struct Estimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Mean and standard error, summed in index order.
Estimate mean_and_error(std::span<const double> samples);

struct XvaInputs {
    CreditSide credit_side = CreditSide::bilateral;
    RecoveryProfile recovery;
    double rho = 0.0;
    CrossTermForm cross_term = CrossTermForm::a_indexed;
    RegressionSpec regression;
};

struct PortfolioValuation {
    std::uint64_t seed = 0;
    /// Per-path time-0 values.
    std::vector<double> risk_free_paths;
    std::vector<double> risky_paths;
    Estimate risk_free;
    Estimate risky;
    bool ridge_fallback = false;
};

/// Path mean of the discounted bucket flows (after collateral, if given).
Estimate portfolio_risk_free_value(const BucketedCashflows& flows, const MarketView& market,
                                   const CollateralPaths* collateral = nullptr);

/// Backward induction over the buckets. Each interval's settlement factor
/// is picked by the sign of the bucket flow plus the regressed continuation
/// value; the realised continuation is what gets rolled back. Without
/// netting, receivable and payable flows are rolled back as separate
/// sign-definite streams.
PortfolioValuation risky_rollback(const BucketedCashflows& flows, const MarketView& market, const XvaInputs& inputs,
                                  std::span<const std::size_t> state_factors,
                                  const CollateralPaths* collateral = nullptr, std::size_t workers = 0);

/// Risk-free minus risky value, with the standard error of the per-path
/// differences.
Estimate portfolio_cva(const PortfolioValuation& valuation);

} // namespace cva
