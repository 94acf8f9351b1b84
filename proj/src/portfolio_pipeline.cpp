#include "cva/portfolio_pipeline.hpp"

#include "cva/errors.hpp"

#include <cmath>

namespace cva {

PortfolioPipeline::PortfolioPipeline(const MonteCarloJob& job) : job_(job) {
    if (job_.portfolio.empty())
        throw InputError("portfolio_pipeline: empty portfolio");
    if (job_.margin && job_.margin->active() && !job_.portfolio.netting)
        throw InputError("portfolio_pipeline: collateral requires a netting agreement");
    cube_ = std::make_unique<ScenarioCube>(
        simulate(job_.processes, job_.correlation, job_.grid, job_.paths, job_.seed, job_.workers));
    market_ = std::make_unique<MarketView>(*cube_, job_.discount, job_.hazard_a, job_.hazard_b);
    flows_ = std::make_unique<BucketedCashflows>(bucket_portfolio(job_.portfolio, *market_, job_.workers));
    state_ = resolve_state_factors(*cube_, job_.xva.regression, job_.portfolio.traded_factors());
}

MonteCarloResult PortfolioPipeline::value(const std::optional<MarginAgreement>& margin) const {
    MonteCarloResult result;
    if (margin && margin->active()) {
        if (!flows_->netting())
            throw InputError("portfolio_pipeline: collateral requires a netting agreement");
        if (std::abs(margin->margin_period - cube_->grid().margin_period()) > 1e-12)
            throw InputError("portfolio_pipeline: grid built for a different margin period");
        if (call_values_.empty())
            call_values_ = call_node_values(*flows_, *market_, state_, job_.xva.regression.degree);
        CollateralPaths collateral = simulate_collateral(call_values_, *market_, *margin);
        result.valuation = risky_rollback(*flows_, *market_, job_.xva, state_, &collateral, job_.workers);
    } else {
        result.valuation = risky_rollback(*flows_, *market_, job_.xva, state_, nullptr, job_.workers);
    }
    result.cva = portfolio_cva(result.valuation);
    return result;
}

MonteCarloResult run_monte_carlo(const MonteCarloJob& job) { return PortfolioPipeline(job).value(job.margin); }

} // namespace cva
