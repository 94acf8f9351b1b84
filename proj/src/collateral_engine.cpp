#include "cva/collateral_engine.hpp"

#include "cva/errors.hpp"

#include <cmath>
#include <map>

namespace cva {

bool MarginAgreement::active() const noexcept { return std::isfinite(h_a()) || std::isfinite(h_b()); }

void MarginAgreement::validate() const {
    if (std::isnan(th_a) || std::isnan(th_b) || std::isnan(mta_a) || std::isnan(mta_b))
        throw InputError("collateral_engine: NaN in margin agreement");
    if (th_a < 0.0 || th_b < 0.0 || mta_a < 0.0 || mta_b < 0.0)
        throw InputError("collateral_engine: thresholds and minimum transfer amounts must be non-negative");
    if (!(margin_period >= 0.0))
        throw InputError("collateral_engine: margin period must be non-negative");
}

MarginAgreement MarginAgreement::from_thresholds(double h_a, double h_b, double margin_period) {
    MarginAgreement m;
    m.th_a = -h_a;
    m.mta_a = 0.0;
    m.th_b = h_b;
    m.mta_b = 0.0;
    m.margin_period = margin_period;
    m.validate();
    return m;
}

double required_collateral(double v, const MarginAgreement& agreement) {
    const double hb = agreement.h_b();
    const double ha = agreement.h_a();
    if (v >= hb)
        return v - hb;
    if (v <= ha)
        return v - ha;
    return 0.0;
}

double evolve_collateral(double gamma_at_call, const ScenarioCube& cube, std::size_t path, std::size_t bucket) {
    const auto factor = cube.find_role(FactorRole::collateral);
    const std::size_t call = cube.grid().shadow_node(bucket);
    const std::size_t settle = cube.grid().bucket_node(bucket);
    if (!factor || call == settle || gamma_at_call == 0.0)
        return gamma_at_call;
    return gamma_at_call * (cube.value(path, settle, *factor) / cube.value(path, call, *factor));
}

std::vector<double> collateral_cashflows(std::span<const double> gammas) {
    if (gammas.empty())
        return {};
    if (gammas.front() != 0.0)
        throw InputError("collateral_engine: collateral balance at the first bucket must be 0");
    std::vector<double> flows;
    for (std::size_t k = 1; k < gammas.size(); ++k)
        flows.push_back(-(gammas[k] - gammas[k - 1]));
    return flows;
}

double CollateralPaths::adjusted_flow(const BucketedCashflows& flows, std::size_t path, std::size_t bucket) const {
    const double previous = bucket == 0 ? 0.0 : gamma(path, bucket - 1);
    return flows.netted(path, bucket) + (gamma(path, bucket) - previous);
}

std::vector<Eigen::VectorXd> call_node_values(const BucketedCashflows& flows, const MarketView& market,
                                              std::span<const std::size_t> state_factors, int degree) {
    if (!flows.netting())
        throw InputError("collateral_engine: collateral requires a netting agreement");
    const ScenarioCube& cube = market.cube();
    const TimeBucketGrid& grid = cube.grid();
    const std::size_t buckets = grid.bucket_count();
    const std::size_t paths = cube.paths();
    const auto times = grid.simulation_times();

    // later[p * buckets + i]: value at T_i of flows in buckets after i
    std::vector<double> later(paths * buckets, 0.0);
    for (std::size_t p = 0; p < paths; ++p)
        for (std::size_t i = buckets - 1; i-- > 0;)
            later[p * buckets + i] = market.path_discount(p, grid.bucket_node(i), grid.bucket_node(i + 1)) *
                                     (flows.netted(p, i + 1) + later[p * buckets + i + 1]);

    std::vector<Eigen::VectorXd> out(buckets);
    std::map<std::size_t, Eigen::VectorXd> by_node;
    for (std::size_t k = 1; k < buckets; ++k) {
        const std::size_t node = grid.shadow_node(k);
        auto cached = by_node.find(node);
        if (cached != by_node.end()) {
            out[k] = cached->second;
            continue;
        }
        // first bucket at or after the call node
        std::size_t first = 0;
        while (grid.bucket_node(first) < node)
            ++first;
        const bool on_bucket = grid.bucket_node(first) == node;
        Eigen::VectorXd pathwise(static_cast<Eigen::Index>(paths));
        for (std::size_t p = 0; p < paths; ++p) {
            const double v = later[p * buckets + first];
            pathwise[static_cast<Eigen::Index>(p)] =
                on_bucket ? v
                          : market.path_discount(p, node, grid.bucket_node(first)) * (flows.netted(p, first) + v);
        }
        Eigen::VectorXd fitted = times[node] == 0.0 ? Eigen::VectorXd::Constant(pathwise.size(), pathwise.mean())
                                                    : conditional_expectation(pathwise,
                                                                              state_at_node(cube, state_factors, node),
                                                                              degree)
                                                          .fitted;
        by_node.emplace(node, fitted);
        out[k] = std::move(fitted);
    }
    return out;
}

CollateralPaths simulate_collateral(const std::vector<Eigen::VectorXd>& call_values, const MarketView& market,
                                    const MarginAgreement& agreement) {
    agreement.validate();
    const ScenarioCube& cube = market.cube();
    const TimeBucketGrid& grid = cube.grid();
    if (std::abs(grid.margin_period() - agreement.margin_period) > 1e-12)
        throw InputError("collateral_engine: grid built for a different margin period");
    if (call_values.size() != grid.bucket_count())
        throw InputError("collateral_engine: call-node values do not match the bucket grid");
    CollateralPaths out(cube.paths(), grid.bucket_count());
    if (!agreement.active())
        return out;
    // the balance is released with the final payments, so the last bucket
    // closes the account
    for (std::size_t k = 1; k + 1 < grid.bucket_count(); ++k)
        for (std::size_t p = 0; p < cube.paths(); ++p) {
            const double called = required_collateral(call_values[k][static_cast<Eigen::Index>(p)], agreement);
            out.gamma(p, k) = evolve_collateral(called, cube, p, k);
        }
    return out;
}

} // namespace cva
