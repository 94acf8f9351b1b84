#include "cva/cashflow_engine.hpp"
#include "cva/errors.hpp"
#include "cva/xva_engine.hpp"

#include <doctest.h>

#include <cmath>

using namespace cva;

namespace {

const TermStructure zero_hazard = TermStructure::flat(0.0, 10.0, CurveKind::hazard);

ProcessSpec equity(double vol = 0.25) {
    return {"eq", ProcessKind::gbm, FactorRole::equity, 0.0, 0.0, vol, 100.0, 0.02};
}

ScenarioCube equity_cube(const TimeBucketGrid& grid, std::size_t paths = 4) {
    return simulate({equity()}, CorrelationSpec::identity({"eq"}), grid, paths, 17);
}

} // namespace

TEST_CASE("swaplet at the money pays nothing") {
    const auto cube = equity_cube(TimeBucketGrid({0.0, 1.0}));
    const double r = 0.03;
    const MarketView market(cube, TermStructure::flat(r, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    const double delta = 0.5;
    const double f = std::expm1(r * delta) / delta;
    CHECK(forward_rate(market, 0, 0.25, 0.25, 0.75) == doctest::Approx(f).epsilon(1e-13));
    const auto swap = SwapSpec::regular("s", 1.0, f, true, 0.25, 0.75, 2);
    CHECK(std::abs(determine_swaplet_cashflow(swap, swap.swaplets[0], market, 0)) < 1e-15);
}

TEST_CASE("swaplet amount to the floating receiver") {
    const auto cube = equity_cube(TimeBucketGrid({0.0, 1.0}));
    const double r = std::log1p(0.05 * 0.5) / 0.5;
    const MarketView market(cube, TermStructure::flat(r, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    const Swaplet sl{0.0, 0.0, 0.5, 0.5, 0.5};
    const SwapSpec payer{"p", 1.0, 0.04, true, {sl}};
    const SwapSpec receiver{"r", 1.0, 0.04, false, {sl}};
    CHECK(determine_swaplet_cashflow(payer, sl, market, 0) == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(determine_swaplet_cashflow(receiver, sl, market, 0) == doctest::Approx(-0.005).epsilon(1e-12));
}

TEST_CASE("deterministic swap value is the single-curve annuity formula") {
    const double r = 0.035;
    const auto grid = TimeBucketGrid::regular(0.25, 3.0);
    const auto cube = equity_cube(grid, 2);
    const auto discount = TermStructure::flat(r, 5.0, CurveKind::interest);
    const MarketView market(cube, discount, zero_hazard, zero_hazard);
    Portfolio book;
    book.swaps.push_back(SwapSpec::regular("irs", 1e6, 0.03, true, 0.0, 3.0, 4));
    const auto flows = bucket_portfolio(book, market);
    double annuity = 0.0;
    for (int i = 1; i <= 12; ++i)
        annuity += 0.25 * std::exp(-r * i * 0.25);
    const double expected = 1e6 * ((1.0 - std::exp(-r * 3.0)) - 0.03 * annuity);
    CHECK(portfolio_risk_free_value(flows, market).mean == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("at-market swap is worth zero under simulated rates") {
    const ProcessSpec rate{"r", ProcessKind::cir, FactorRole::rate, 0.3, 0.045, 0.08, 0.03, 0.0};
    const auto grid = TimeBucketGrid::regular(7.0 / 365, 2.0);
    const auto cube = simulate({rate}, CorrelationSpec::identity({"r"}), grid, 20000, 4242);
    const MarketView market(cube, TermStructure::flat(0.0, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    double annuity = 0.0;
    for (int i = 1; i <= 8; ++i)
        annuity += 0.25 * model_discount(rate, rate.initial, 0.25 * i);
    const double par = (1.0 - model_discount(rate, rate.initial, 2.0)) / annuity;
    Portfolio book;
    book.swaps.push_back(SwapSpec::regular("irs", 1.0, par, true, 0.0, 2.0, 4));
    const auto value = portfolio_risk_free_value(bucket_portfolio(book, market), market);
    CHECK(std::abs(value.mean) < 2.0 * value.standard_error);
}

TEST_CASE("allocation to the previous bucket") {
    const auto cube = equity_cube(TimeBucketGrid({0.0, 0.25, 1.0}));
    const MarketView flat(cube, TermStructure::flat(0.03, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    auto c = allocate_to_bucket(10.0, 0.25, flat, 0);
    CHECK(c.bucket == 1);
    CHECK(c.amount == 10.0);
    c = allocate_to_bucket(10.0, 0.5, flat, 0);
    CHECK(c.bucket == 1);
    CHECK(c.amount == doctest::Approx(10.0 * std::exp(-0.0075)).epsilon(1e-15));
    const MarketView zero(cube, TermStructure::flat(0.0, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    CHECK(allocate_to_bucket(10.0, 0.9, zero, 0).amount == 10.0);
    CHECK(allocate_to_bucket(10.0, 1.0, zero, 0).bucket == 2);
}

TEST_CASE("aggregation with and without netting") {
    const std::vector<double> both{5.0, -3.0};
    const auto t = aggregate(both);
    CHECK(t.netted == 2.0);
    CHECK(t.positive == 5.0);
    CHECK(t.negative == -3.0);
    const auto empty = aggregate({});
    CHECK(empty.netted == 0.0);
    CHECK(empty.positive == 0.0);
    CHECK(empty.negative == 0.0);
}

TEST_CASE("equity swap and forward flows") {
    const auto grid = TimeBucketGrid({0.0, 0.5, 1.0});
    const auto cube = equity_cube(grid, 3);
    const MarketView market(cube, TermStructure::flat(0.0, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    Portfolio book;
    book.equity_swaps.push_back({"es", "eq", 1000.0, 0.03, true, {0.0, 0.5, 1.0}});
    book.forwards.push_back({"fw", "eq", 10.0, 100.0, 1.0});
    book.fixed_flows.push_back({"fee", 0.0, -1.0});
    const auto flows = bucket_portfolio(book, market);
    for (std::size_t p = 0; p < 3; ++p) {
        const double s0 = cube.value(p, 0, 0), s1 = cube.value(p, 1, 0), s2 = cube.value(p, 2, 0);
        CHECK(flows.netted(p, 0) == -1.0);
        CHECK(flows.netted(p, 1) == doctest::Approx(1000.0 * (0.015 - (s1 / s0 - 1.0))).epsilon(1e-14));
        CHECK(flows.netted(p, 2) ==
              doctest::Approx(1000.0 * (0.015 - (s2 / s1 - 1.0)) + 10.0 * (s2 - 100.0)).epsilon(1e-14));
    }
}

TEST_CASE("mirror portfolio gives negated buckets") {
    const ProcessSpec rate{"r", ProcessKind::cir, FactorRole::rate, 0.3, 0.04, 0.08, 0.03, 0.0};
    const auto grid = TimeBucketGrid::regular(1.0 / 12, 2.0);
    const auto cube = simulate({rate, equity()}, CorrelationSpec::identity({"r", "eq"}), grid, 200, 3);
    const MarketView market(cube, TermStructure::flat(0.0, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    Portfolio book;
    book.netting = false;
    book.swaps.push_back(SwapSpec::regular("irs", 1e6, 0.035, true, 0.0, 2.0, 4));
    book.equity_swaps.push_back({"es", "eq", 1e5, 0.02, false, {0.0, 0.5, 1.0, 1.5}});
    book.forwards.push_back({"fw", "eq", 300.0, 101.0, 1.3});
    book.fixed_flows.push_back({"fee", 0.7, 250.0});
    const auto a = bucket_portfolio(book, market);
    const auto b = bucket_portfolio(book.negated(), market);
    for (std::size_t p = 0; p < a.paths(); ++p)
        for (std::size_t k = 0; k < a.buckets(); ++k) {
            CHECK(b.netted(p, k) == doctest::Approx(-a.netted(p, k)).epsilon(1e-12).scale(1.0));
            CHECK(b.positive(p, k) == doctest::Approx(-a.negative(p, k)).epsilon(1e-12).scale(1.0));
            CHECK(a.netted(p, k) == a.positive(p, k) + a.negative(p, k));
        }
}

TEST_CASE("flows beyond the grid are rejected") {
    const auto cube = equity_cube(TimeBucketGrid({0.0, 1.0}));
    const MarketView market(cube, TermStructure::flat(0.0, 5.0, CurveKind::interest), zero_hazard, zero_hazard);
    Portfolio book;
    book.forwards.push_back({"fw", "eq", 1.0, 100.0, 2.0});
    CHECK_THROWS_AS(bucket_portfolio(book, market), HorizonError);
    Portfolio unknown;
    unknown.forwards.push_back({"fw", "missing", 1.0, 100.0, 0.5});
    CHECK_THROWS_AS(bucket_portfolio(unknown, market), InputError);
}
