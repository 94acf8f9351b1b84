#pragma once

#include "cva/scenario_engine.hpp"
#include "cva/term_structures.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cva {

/// Read access to one cube together with deterministic curves used for any
/// role the cube does not simulate (rate, hazard_a, hazard_b).
class MarketView {
public:
    MarketView(const ScenarioCube& cube, TermStructure discount, TermStructure hazard_a, TermStructure hazard_b);

    const ScenarioCube& cube() const noexcept { return *cube_; }
    const TermStructure& discount_curve() const noexcept { return discount_; }

    /// Zero-coupon price P(t, maturity) seen on `path` at time t.
    double bond(std::size_t path, double t, double maturity) const;

    /// exp(-integral of r) between two simulation nodes along a path
    /// (trapezoid on node values for a simulated rate).
    double path_discount(std::size_t path, std::size_t node_from, std::size_t node_to) const;
    /// Integrated hazard of one party between two simulation nodes.
    double hazard_integral(std::size_t path, FactorRole party, std::size_t node_from, std::size_t node_to) const;

    /// Value of a named factor at time t on a path (linear between nodes).
    double factor_at(std::size_t path, std::size_t factor, double t) const;

private:
    double integrate(std::size_t path, std::optional<std::size_t> factor, const TermStructure& fallback,
                     std::size_t node_from, std::size_t node_to) const;

    const ScenarioCube* cube_;
    TermStructure discount_;
    TermStructure hazard_a_;
    TermStructure hazard_b_;
    std::optional<std::size_t> rate_;
    std::optional<std::size_t> hz_a_;
    std::optional<std::size_t> hz_b_;
};

struct Swaplet {
    double fixing = 0.0;
    double start = 0.0;
    double end = 0.0;
    double pay = 0.0;
    double accrual = 0.0;
};

/// Fixed-for-floating swap. With pay_fixed, party A pays the fixed rate and
/// receives the floating forward.
struct SwapSpec {
    std::string label;
    double notional = 0.0;
    double fixed_rate = 0.0;
    bool pay_fixed = true;
    std::vector<Swaplet> swaplets;

    void validate() const;

    /// Regular schedule from `start` to `maturity`; each period fixes at its
    /// start and pays at its end.
    static SwapSpec regular(std::string label, double notional, double fixed_rate, bool pay_fixed, double start,
                            double maturity, int frequency);
};

/// Total-return swap on a traded factor: the equity leg pays
/// notional * (S(end)/S(start) - 1) per period against a fixed rate.
struct EquitySwapSpec {
    std::string label;
    std::string factor;
    double notional = 0.0;
    double fixed_rate = 0.0;
    /// true: A pays the equity return and receives fixed.
    bool pay_equity = true;
    std::vector<double> dates; // period boundaries, first = start

    void validate() const;
};

/// notional * (S(maturity) - strike) received by A.
struct ForwardSpec {
    std::string label;
    std::string factor;
    double notional = 0.0;
    double strike = 0.0;
    double maturity = 0.0;
};

struct FixedFlow {
    std::string label;
    double time = 0.0;
    double amount = 0.0;
};

struct Portfolio {
    bool netting = true;
    std::vector<SwapSpec> swaps;
    std::vector<EquitySwapSpec> equity_swaps;
    std::vector<ForwardSpec> forwards;
    std::vector<FixedFlow> fixed_flows;

    bool empty() const noexcept {
        return swaps.empty() && equity_swaps.empty() && forwards.empty() && fixed_flows.empty();
    }
    /// Names of cube factors the portfolio pays on.
    std::vector<std::string> traded_factors() const;
    Portfolio negated() const;
};

/// Simply-compounded forward for [start, end] seen at `fixing` on a path.
double forward_rate(const MarketView& market, std::size_t path, double fixing, double start, double end);

/// Signed swaplet amount to A, paid at swaplet.pay.
double determine_swaplet_cashflow(const SwapSpec& spec, const Swaplet& swaplet, const MarketView& market,
                                  std::size_t path);

/// Moves an amount paid at pay_time back to the bucket T_k <= pay_time
/// with the bucket-T_k curve of the path. Returns the bucket index and the
/// discounted amount.
struct BucketContribution {
    std::size_t bucket = 0;
    double amount = 0.0;
};

BucketContribution allocate_to_bucket(double amount, double pay_time, const MarketView& market, std::size_t path);

struct BucketTotal {
    double netted = 0.0;
    double positive = 0.0;
    double negative = 0.0;
};

/// Sums contributions in order; the positive and negative sums keep the
/// offsetting that non-netting does not recognise.
BucketTotal aggregate(std::span<const double> contributions);

/// Per (path, bucket) flows. Positive and negative parts are always kept;
/// `netting` records how the portfolio is to be valued.
class BucketedCashflows {
public:
    BucketedCashflows(std::size_t paths, std::size_t buckets, bool netting);

    std::size_t paths() const noexcept { return paths_; }
    std::size_t buckets() const noexcept { return buckets_; }
    bool netting() const noexcept { return netting_; }

    double netted(std::size_t path, std::size_t bucket) const {
        return positive(path, bucket) + negative(path, bucket);
    }
    double positive(std::size_t path, std::size_t bucket) const { return pos_[path * buckets_ + bucket]; }
    double negative(std::size_t path, std::size_t bucket) const { return neg_[path * buckets_ + bucket]; }
    void add(std::size_t path, std::size_t bucket, double amount);

private:
    std::size_t paths_;
    std::size_t buckets_;
    bool netting_;
    std::vector<double> pos_;
    std::vector<double> neg_;
};

/// Determines and buckets every flow of the portfolio on every path.
BucketedCashflows bucket_portfolio(const Portfolio& portfolio, const MarketView& market, std::size_t workers = 0);

} // namespace cva
