#include "cva/xva_engine.hpp"

#include "cva/errors.hpp"
#include "cva/parallel.hpp"

#include <cmath>

namespace cva {

Estimate mean_and_error(std::span<const double> samples) {
    Estimate e;
    if (samples.empty())
        throw InputError("xva_engine: no samples");
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    for (double x : samples)
        sum += x;
    e.mean = sum / n;
    if (samples.size() > 1) {
        double ss = 0.0;
        for (double x : samples)
            ss += (x - e.mean) * (x - e.mean);
        e.standard_error = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

namespace {

// Flow of bucket k on path p, collateral included.
double bucket_flow(const BucketedCashflows& flows, const CollateralPaths* collateral, std::size_t p, std::size_t k) {
    return collateral ? collateral->adjusted_flow(flows, p, k) : flows.netted(p, k);
}

void check_shapes(const BucketedCashflows& flows, const MarketView& market, const CollateralPaths* collateral) {
    const ScenarioCube& cube = market.cube();
    if (cube.paths() == 0)
        throw InputError("xva_engine: empty cube");
    if (flows.paths() != cube.paths() || flows.buckets() != cube.grid().bucket_count())
        throw InputError("xva_engine: bucketed flows do not match the cube");
    if (collateral && collateral->buckets() != flows.buckets())
        throw InputError("xva_engine: collateral does not match the bucket grid");
    if (collateral && !flows.netting())
        throw InputError("xva_engine: collateral requires a netting agreement");
}

// Per path and interval: discount and the two risky one-period factors.
struct IntervalFactors {
    std::vector<double> discount;
    std::vector<double> asset;     // value is an asset to A
    std::vector<double> liability; // value is a liability to A
};

IntervalFactors interval_factors(const MarketView& market, const XvaInputs& in, std::size_t workers) {
    const ScenarioCube& cube = market.cube();
    const TimeBucketGrid& grid = cube.grid();
    const std::size_t intervals = grid.bucket_count() - 1;
    const std::size_t paths = cube.paths();
    IntervalFactors f;
    f.discount.resize(paths * intervals);
    f.asset.resize(paths * intervals);
    f.liability.resize(paths * intervals);
    in.recovery.validate();
    parallel_for(paths, workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p)
            for (std::size_t i = 0; i < intervals; ++i) {
                const std::size_t n0 = grid.bucket_node(i);
                const std::size_t n1 = grid.bucket_node(i + 1);
                const std::size_t idx = p * intervals + i;
                const double d = market.path_discount(p, n0, n1);
                const double int_b = market.hazard_integral(p, FactorRole::hazard_b, n0, n1);
                const double q_b = -std::expm1(-int_b);
                f.discount[idx] = d;
                if (in.credit_side == CreditSide::unilateral_b) {
                    f.asset[idx] = unilateral_dtm_factor(d, q_b, in.recovery.phi_b, SignState::nonnegative);
                    f.liability[idx] = unilateral_dtm_factor(d, q_b, in.recovery.phi_b, SignState::negative);
                } else {
                    const double int_a = market.hazard_integral(p, FactorRole::hazard_a, n0, n1);
                    const double q_a = -std::expm1(-int_a);
                    SettlementFactors y = dtm_settlement_factors(std::exp(-int_a), q_a, std::exp(-int_b), q_b,
                                                                 in.recovery, in.rho, in.cross_term);
                    f.asset[idx] = bilateral_dtm_factor(d, y, SignState::nonnegative);
                    f.liability[idx] = bilateral_dtm_factor(d, y, SignState::negative);
                }
            }
    });
    return f;
}

} // namespace

Estimate portfolio_risk_free_value(const BucketedCashflows& flows, const MarketView& market,
                                   const CollateralPaths* collateral) {
    check_shapes(flows, market, collateral);
    const TimeBucketGrid& grid = market.cube().grid();
    const std::size_t buckets = grid.bucket_count();
    std::vector<double> values(flows.paths());
    for (std::size_t p = 0; p < flows.paths(); ++p) {
        double v = 0.0;
        for (std::size_t k = buckets; k-- > 1;)
            v = market.path_discount(p, grid.bucket_node(k - 1), grid.bucket_node(k)) *
                (bucket_flow(flows, collateral, p, k) + v);
        values[p] = bucket_flow(flows, collateral, p, 0) + v;
    }
    return mean_and_error(values);
}

PortfolioValuation risky_rollback(const BucketedCashflows& flows, const MarketView& market, const XvaInputs& inputs,
                                  std::span<const std::size_t> state_factors, const CollateralPaths* collateral,
                                  std::size_t workers) {
    check_shapes(flows, market, collateral);
    const ScenarioCube& cube = market.cube();
    const TimeBucketGrid& grid = cube.grid();
    const std::size_t buckets = grid.bucket_count();
    const std::size_t intervals = buckets - 1;
    const std::size_t paths = cube.paths();
    const IntervalFactors f = interval_factors(market, inputs, workers);

    PortfolioValuation out;
    out.seed = cube.seed();
    out.risk_free_paths.assign(paths, 0.0);
    out.risky_paths.assign(paths, 0.0);

    auto flow_of = [&](std::size_t p, std::size_t k, int stream) {
        if (stream > 0)
            return flows.positive(p, k);
        if (stream < 0)
            return flows.negative(p, k);
        return bucket_flow(flows, collateral, p, k);
    };

    // stream 0: netted; +1/-1: sign-definite halves without netting
    const std::vector<int> streams = flows.netting() ? std::vector<int>{0} : std::vector<int>{1, -1};
    const bool with_gamma = collateral != nullptr;
    std::vector<double> psi(paths);
    std::vector<double> phi(paths);
    for (int stream : streams) {
        std::fill(psi.begin(), psi.end(), 0.0);
        std::fill(phi.begin(), phi.end(), 0.0);
        for (std::size_t i = intervals; i-- > 0;) {
            const std::size_t next = i + 1;
            Eigen::VectorXd continuation = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(paths));
            if (stream == 0 && next != buckets - 1) {
                Eigen::MatrixXd state = state_at_node(cube, state_factors, grid.bucket_node(next));
                if (with_gamma) {
                    state.conservativeResize(Eigen::NoChange, state.cols() + 1);
                    for (std::size_t p = 0; p < paths; ++p)
                        state(static_cast<Eigen::Index>(p), state.cols() - 1) = collateral->gamma(p, next);
                }
                Eigen::Map<const Eigen::VectorXd> realised(psi.data(), static_cast<Eigen::Index>(paths));
                RegressionFit fit = conditional_expectation(realised, state, inputs.regression.degree);
                out.ridge_fallback = out.ridge_fallback || fit.ridge_fallback;
                continuation = std::move(fit.fitted);
            }
            for (std::size_t p = 0; p < paths; ++p) {
                const std::size_t idx = p * intervals + i;
                const double x = flow_of(p, next, stream);
                SignState sign = SignState::nonnegative;
                if (stream == 0)
                    sign = sign_of(x + continuation[static_cast<Eigen::Index>(p)]);
                else if (stream < 0)
                    sign = SignState::negative;
                const double y = sign == SignState::nonnegative ? f.asset[idx] : f.liability[idx];
                psi[p] = y * (x + psi[p]);
                phi[p] = f.discount[idx] * (x + phi[p]);
            }
        }
        for (std::size_t p = 0; p < paths; ++p) {
            const double x0 = flow_of(p, 0, stream);
            out.risky_paths[p] += x0 + psi[p];
            out.risk_free_paths[p] += x0 + phi[p];
        }
    }
    out.risk_free = mean_and_error(out.risk_free_paths);
    out.risky = mean_and_error(out.risky_paths);
    return out;
}

Estimate portfolio_cva(const PortfolioValuation& valuation) {
    if (valuation.risk_free_paths.size() != valuation.risky_paths.size())
        throw InputError("xva_engine: risk-free and risky values come from different cubes");
    std::vector<double> diff(valuation.risky_paths.size());
    for (std::size_t p = 0; p < diff.size(); ++p)
        diff[p] = valuation.risk_free_paths[p] - valuation.risky_paths[p];
    return mean_and_error(diff);
}

} // namespace cva
