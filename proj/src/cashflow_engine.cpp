#include "cva/cashflow_engine.hpp"

#include "cva/errors.hpp"
#include "cva/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace cva {

MarketView::MarketView(const ScenarioCube& cube, TermStructure discount, TermStructure hazard_a,
                       TermStructure hazard_b)
    : cube_(&cube), discount_(std::move(discount)), hazard_a_(std::move(hazard_a)), hazard_b_(std::move(hazard_b)),
      rate_(cube.find_role(FactorRole::rate)), hz_a_(cube.find_role(FactorRole::hazard_a)),
      hz_b_(cube.find_role(FactorRole::hazard_b)) {
    if (discount_.kind() != CurveKind::interest || hazard_a_.kind() != CurveKind::hazard ||
        hazard_b_.kind() != CurveKind::hazard)
        throw InputError("cashflow_engine: curve kinds do not match their roles");
    const double horizon = cube.grid().horizon();
    if (!rate_ && discount_.horizon() < horizon - 1e-12)
        throw HorizonError(horizon, discount_.horizon());
    if (!hz_a_ && hazard_a_.horizon() < horizon - 1e-12)
        throw HorizonError(horizon, hazard_a_.horizon());
    if (!hz_b_ && hazard_b_.horizon() < horizon - 1e-12)
        throw HorizonError(horizon, hazard_b_.horizon());
}

double MarketView::factor_at(std::size_t path, std::size_t factor, double t) const {
    const auto times = cube_->grid().simulation_times();
    if (t < -1e-12 || t > times.back() + 1e-9)
        throw HorizonError(t, times.back());
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t hi = std::min(static_cast<std::size_t>(it - times.begin()), times.size() - 1);
    const std::size_t lo = hi == 0 ? 0 : hi - 1;
    if (lo == hi || t <= times[lo])
        return cube_->value(path, lo, factor);
    if (t >= times[hi])
        return cube_->value(path, hi, factor);
    const double w = (t - times[lo]) / (times[hi] - times[lo]);
    return (1.0 - w) * cube_->value(path, lo, factor) + w * cube_->value(path, hi, factor);
}

double MarketView::bond(std::size_t path, double t, double maturity) const {
    if (maturity < t)
        throw InputError("cashflow_engine: bond maturity before observation time");
    if (!rate_)
        return discount_factor(discount_, t, maturity);
    const double r = factor_at(path, *rate_, t);
    return model_discount(cube_->specs()[*rate_], r, maturity - t);
}

double MarketView::integrate(std::size_t path, std::optional<std::size_t> factor, const TermStructure& fallback,
                             std::size_t node_from, std::size_t node_to) const {
    const auto times = cube_->grid().simulation_times();
    if (node_from > node_to || node_to >= times.size())
        throw InputError("cashflow_engine: bad node interval");
    if (!factor)
        return fallback.integral(times[node_from], times[node_to]);
    double sum = 0.0;
    for (std::size_t n = node_from; n < node_to; ++n)
        sum += 0.5 * (cube_->value(path, n, *factor) + cube_->value(path, n + 1, *factor)) * (times[n + 1] - times[n]);
    return sum;
}

double MarketView::path_discount(std::size_t path, std::size_t node_from, std::size_t node_to) const {
    return std::exp(-integrate(path, rate_, discount_, node_from, node_to));
}

double MarketView::hazard_integral(std::size_t path, FactorRole party, std::size_t node_from,
                                   std::size_t node_to) const {
    if (party == FactorRole::hazard_a)
        return integrate(path, hz_a_, hazard_a_, node_from, node_to);
    if (party == FactorRole::hazard_b)
        return integrate(path, hz_b_, hazard_b_, node_from, node_to);
    throw InputError("cashflow_engine: hazard integral needs a hazard role");
}

void SwapSpec::validate() const {
    if (swaplets.empty())
        throw InputError("cashflow_engine: swap '" + label + "' has no swaplets");
    double last_pay = -1.0;
    for (const Swaplet& s : swaplets) {
        if (!(s.fixing <= s.start && s.start < s.end && s.end <= s.pay))
            throw InputError("cashflow_engine: swap '" + label + "' needs fixing <= start < end <= pay");
        if (!(s.accrual > 0.0))
            throw InputError("cashflow_engine: swap '" + label + "' has non-positive accrual");
        if (s.pay < last_pay)
            throw InputError("cashflow_engine: swap '" + label + "' swaplets out of payment order");
        last_pay = s.pay;
    }
}

SwapSpec SwapSpec::regular(std::string label, double notional, double fixed_rate, bool pay_fixed, double start,
                           double maturity, int frequency) {
    if (frequency <= 0 || !(maturity > start) || start < 0.0)
        throw InputError("cashflow_engine: swap needs 0 <= start < maturity and positive frequency");
    const double periods_exact = (maturity - start) * frequency;
    const auto periods = static_cast<long>(std::llround(periods_exact));
    if (periods < 1 || std::abs(periods_exact - static_cast<double>(periods)) > 1e-9)
        throw InputError("cashflow_engine: swap tenor must be a whole number of periods");
    SwapSpec spec{std::move(label), notional, fixed_rate, pay_fixed, {}};
    for (long k = 0; k < periods; ++k) {
        const double s = start + static_cast<double>(k) / frequency;
        const double e = k + 1 == periods ? maturity : start + static_cast<double>(k + 1) / frequency;
        spec.swaplets.push_back({s, s, e, e, e - s});
    }
    return spec;
}

void EquitySwapSpec::validate() const {
    if (dates.size() < 2)
        throw InputError("cashflow_engine: equity swap '" + label + "' needs at least two dates");
    for (std::size_t i = 1; i < dates.size(); ++i)
        if (!(dates[i] > dates[i - 1]))
            throw InputError("cashflow_engine: equity swap '" + label + "' dates must increase");
    if (dates.front() < 0.0)
        throw InputError("cashflow_engine: equity swap '" + label + "' starts before 0");
}

std::vector<std::string> Portfolio::traded_factors() const {
    std::vector<std::string> names;
    auto add = [&names](const std::string& n) {
        if (std::find(names.begin(), names.end(), n) == names.end())
            names.push_back(n);
    };
    for (const auto& e : equity_swaps)
        add(e.factor);
    for (const auto& f : forwards)
        add(f.factor);
    return names;
}

Portfolio Portfolio::negated() const {
    Portfolio out = *this;
    for (auto& s : out.swaps)
        s.pay_fixed = !s.pay_fixed;
    for (auto& e : out.equity_swaps)
        e.pay_equity = !e.pay_equity;
    for (auto& f : out.forwards) {
        f.notional = -f.notional;
    }
    for (auto& f : out.fixed_flows)
        f.amount = -f.amount;
    return out;
}

double forward_rate(const MarketView& market, std::size_t path, double fixing, double start, double end) {
    if (!(end > start) || start < fixing)
        throw InputError("cashflow_engine: forward needs fixing <= start < end");
    const double p_start = market.bond(path, fixing, start);
    const double p_end = market.bond(path, fixing, end);
    return (p_start / p_end - 1.0) / (end - start);
}

double determine_swaplet_cashflow(const SwapSpec& spec, const Swaplet& swaplet, const MarketView& market,
                                  std::size_t path) {
    const double horizon = market.cube().grid().horizon();
    if (swaplet.fixing > horizon + 1e-9)
        throw HorizonError(swaplet.fixing, horizon);
    const double f = forward_rate(market, path, swaplet.fixing, swaplet.start, swaplet.end);
    const double to_floating_receiver = spec.notional * (f - spec.fixed_rate) * swaplet.accrual;
    return spec.pay_fixed ? to_floating_receiver : -to_floating_receiver;
}

BucketContribution allocate_to_bucket(double amount, double pay_time, const MarketView& market, std::size_t path) {
    const auto& grid = market.cube().grid();
    if (pay_time < grid.bucket_times().front() - 1e-12)
        throw InputError("cashflow_engine: payment before the first bucket");
    BucketContribution c;
    c.bucket = grid.bucket_containing(pay_time);
    const double bucket_time = grid.bucket_times()[c.bucket];
    c.amount = pay_time <= bucket_time ? amount : amount * market.bond(path, bucket_time, pay_time);
    return c;
}

BucketTotal aggregate(std::span<const double> contributions) {
    BucketTotal total;
    for (double x : contributions) {
        if (x >= 0.0)
            total.positive += x;
        else
            total.negative += x;
    }
    total.netted = total.positive + total.negative;
    return total;
}

BucketedCashflows::BucketedCashflows(std::size_t paths, std::size_t buckets, bool netting)
    : paths_(paths), buckets_(buckets), netting_(netting), pos_(paths * buckets, 0.0), neg_(paths * buckets, 0.0) {}

void BucketedCashflows::add(std::size_t path, std::size_t bucket, double amount) {
    if (amount >= 0.0)
        pos_[path * buckets_ + bucket] += amount;
    else
        neg_[path * buckets_ + bucket] += amount;
}

BucketedCashflows bucket_portfolio(const Portfolio& portfolio, const MarketView& market, std::size_t workers) {
    const ScenarioCube& cube = market.cube();
    for (const auto& s : portfolio.swaps)
        s.validate();
    std::vector<std::size_t> eq_factor;
    for (const auto& e : portfolio.equity_swaps) {
        e.validate();
        eq_factor.push_back(cube.require_name(e.factor));
    }
    std::vector<std::size_t> fwd_factor;
    for (const auto& f : portfolio.forwards)
        fwd_factor.push_back(cube.require_name(f.factor));

    BucketedCashflows out(cube.paths(), cube.grid().bucket_count(), portfolio.netting);
    parallel_for(cube.paths(), workers, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            auto book = [&](double amount, double pay_time) {
                BucketContribution c = allocate_to_bucket(amount, pay_time, market, p);
                out.add(p, c.bucket, c.amount);
            };
            for (const auto& swap : portfolio.swaps)
                for (const auto& sl : swap.swaplets)
                    book(determine_swaplet_cashflow(swap, sl, market, p), sl.pay);
            for (std::size_t i = 0; i < portfolio.equity_swaps.size(); ++i) {
                const auto& e = portfolio.equity_swaps[i];
                for (std::size_t k = 1; k < e.dates.size(); ++k) {
                    const double s0 = market.factor_at(p, eq_factor[i], e.dates[k - 1]);
                    const double s1 = market.factor_at(p, eq_factor[i], e.dates[k]);
                    const double equity_leg = e.notional * (s1 / s0 - 1.0);
                    const double fixed_leg = e.notional * e.fixed_rate * (e.dates[k] - e.dates[k - 1]);
                    book(e.pay_equity ? fixed_leg - equity_leg : equity_leg - fixed_leg, e.dates[k]);
                }
            }
            for (std::size_t i = 0; i < portfolio.forwards.size(); ++i) {
                const auto& f = portfolio.forwards[i];
                const double s = market.factor_at(p, fwd_factor[i], f.maturity);
                book(f.notional * (s - f.strike), f.maturity);
            }
            for (const auto& f : portfolio.fixed_flows)
                book(f.amount, f.time);
        }
    });
    return out;
}

} // namespace cva
