#pragma once

#include "cva/cashflow_engine.hpp"
#include "cva/regression.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace cva {

/// Two-sided threshold agreement. Party B posts once the portfolio value
/// reaches H_B = th_b + mta_b; party A posts once it falls to
/// H_A = -(th_a + mta_a). An infinite threshold disables that side.
struct MarginAgreement {
    double th_a = std::numeric_limits<double>::infinity();
    double mta_a = 0.0;
    double th_b = std::numeric_limits<double>::infinity();
    double mta_b = 0.0;
    double margin_period = 14.0 / 365.0;

    double h_a() const noexcept { return -(th_a + mta_a); }
    double h_b() const noexcept { return th_b + mta_b; }
    /// False when both thresholds are infinite.
    bool active() const noexcept;
    void validate() const;

    static MarginAgreement from_thresholds(double h_a, double h_b, double margin_period = 14.0 / 365.0);
};

/// Collateral called against portfolio value v: v - H_B above H_B, v - H_A
/// below H_A, 0 in between. Positive means held by A.
double required_collateral(double v, const MarginAgreement& agreement);

/// Collateral amount after the margin period of bucket k, scaled by the
/// path's collateral-factor ratio between the call node and T_k (no
/// collateral factor: unchanged).
double evolve_collateral(double gamma_at_call, const ScenarioCube& cube, std::size_t path, std::size_t bucket);

/// Reversing flows -(G[k] - G[k-1]) for k = 1..n-1, i.e. the movements
/// that unwind each balance change. G[0] must be 0.
std::vector<double> collateral_cashflows(std::span<const double> gammas);

/// Per (path, bucket) collateral balance.
class CollateralPaths {
public:
    CollateralPaths(std::size_t paths, std::size_t buckets) : buckets_(buckets), gamma_(paths * buckets, 0.0) {}
    double gamma(std::size_t path, std::size_t bucket) const { return gamma_[path * buckets_ + bucket]; }
    double& gamma(std::size_t path, std::size_t bucket) { return gamma_[path * buckets_ + bucket]; }
    std::size_t buckets() const noexcept { return buckets_; }
    /// Total bucket flow to A after collateral: the netted flow plus the
    /// balance change (collateral received is an inflow now; its release,
    /// the reversing flow, is an outflow later).
    double adjusted_flow(const BucketedCashflows& flows, std::size_t path, std::size_t bucket) const;

private:
    std::size_t buckets_;
    std::vector<double> gamma_;
};

/// Risk-free portfolio value at the collateral call node of every bucket,
/// estimated by regressing each path's discounted later flows on the state
/// at that node. Row k holds the per-path values for bucket k (row 0 is
/// unused and left empty).
std::vector<Eigen::VectorXd> call_node_values(const BucketedCashflows& flows, const MarketView& market,
                                              std::span<const std::size_t> state_factors, int degree);

/// Collateral balances for every path and bucket. Gamma(T_0) = 0 and the
/// last bucket releases whatever is held.
CollateralPaths simulate_collateral(const std::vector<Eigen::VectorXd>& call_values, const MarketView& market,
                                    const MarginAgreement& agreement);

} // namespace cva
