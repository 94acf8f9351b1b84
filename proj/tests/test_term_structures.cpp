#include "cva/errors.hpp"
#include "cva/term_structures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace cva;

TEST_CASE("discount factor on empty interval and zero rate") {
    const auto curve = TermStructure::flat(0.03, 2.0, CurveKind::interest);
    CHECK(discount_factor(curve, 0.5, 0.5) == 1.0);
    CHECK(discount_factor(TermStructure::flat(0.0, 1.0, CurveKind::interest), 0.0, 1.0) == 1.0);
}

TEST_CASE("flat discount matches quadrature") {
    const auto curve = TermStructure::flat(0.03, 2.0, CurveKind::interest);
    const double q = oracle::simpson([&](double t) { return curve.rate_at(t); }, 0.0, 1.0);
    CHECK(discount_factor(curve, 0.0, 1.0) == doctest::Approx(std::exp(-q)).epsilon(1e-14));
    CHECK(discount_factor(curve, 0.0, 1.0) == doctest::Approx(0.9704455335485082).epsilon(1e-15));
}

TEST_CASE("survival and default probabilities") {
    const auto zero = TermStructure::flat(0.0, 3.0, CurveKind::hazard);
    CHECK(survival_probability(zero, 0.2, 2.7) == 1.0);
    CHECK(default_probability(zero, 0.2, 2.7) == 0.0);

    const auto flat = TermStructure::flat(0.02, 3.0, CurveKind::hazard);
    CHECK(survival_probability(flat, 0.0, 1.0) == doctest::Approx(std::exp(-0.02)).epsilon(1e-15));
    CHECK(default_probability(flat, 0.0, 1.0) == doctest::Approx(-std::expm1(-0.02)).epsilon(1e-15));

    const TermStructure steps({0.0, 0.5, 1.0}, {0.01, 0.03}, CurveKind::hazard);
    const double q = oracle::simpson_pieces([&](double t) { return steps.rate_at(t); },
                                            std::vector<double>{0.0, 0.5, 1.0});
    CHECK(survival_probability(steps, 0.0, 1.0) == doctest::Approx(std::exp(-q)).epsilon(1e-12));
    CHECK(survival_probability(steps, 0.0, 1.0) == doctest::Approx(std::exp(-0.02)).epsilon(1e-15));
}

TEST_CASE("piecewise integral against quadrature on random curves") {
    oracle::Draw draw(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> nodes{0.0};
        std::vector<double> rates;
        const int n = draw.integer(1, 8);
        for (int i = 0; i < n; ++i) {
            nodes.push_back(nodes.back() + draw.uniform(0.05, 1.0));
            rates.push_back(draw.uniform(0.0, 0.1));
        }
        const TermStructure curve(nodes, rates, CurveKind::interest);
        const double t = draw.uniform(0.0, nodes.back());
        const double s = draw.uniform(t, nodes.back());
        std::vector<double> cuts{t};
        for (double x : nodes)
            if (x > t && x < s)
                cuts.push_back(x);
        cuts.push_back(s);
        const double q = oracle::simpson_pieces([&](double u) { return curve.rate_at(u); }, cuts);
        CHECK(curve.integral(t, s) == doctest::Approx(q).epsilon(1e-10));
    }
}

TEST_CASE("multiplicativity and additivity over interior split points") {
    oracle::Draw draw(12);
    const TermStructure curve({0.0, 0.3, 1.1, 2.0, 5.0}, {0.01, 0.05, 0.02, 0.08}, CurveKind::hazard);
    for (int trial = 0; trial < 200; ++trial) {
        const double t = draw.uniform(0.0, 5.0);
        const double s = draw.uniform(t, 5.0);
        const double u = draw.uniform(t, s);
        CHECK(std::abs(survival_probability(curve, t, u) * survival_probability(curve, u, s) -
                       survival_probability(curve, t, s)) < 1e-14);
        CHECK(std::abs(default_probability(curve, t, u) +
                       survival_probability(curve, t, u) * default_probability(curve, u, s) -
                       default_probability(curve, t, s)) < 1e-14);
        CHECK(survival_probability(curve, t, s) <= survival_probability(curve, t, u));
    }
}

TEST_CASE("interval errors") {
    const auto curve = TermStructure::flat(0.03, 2.0, CurveKind::interest);
    CHECK_THROWS_AS(discount_factor(curve, 1.0, 0.5), InputError);
    CHECK_THROWS_AS(discount_factor(curve, 0.0, 2.5), HorizonError);
    CHECK_THROWS_AS(TermStructure({0.0, 1.0, 0.5}, {0.01, 0.02}, CurveKind::interest), InputError);
}

TEST_CASE("bootstrap of zero spreads gives zero hazard") {
    const auto discount = TermStructure::flat(0.03, 10.0, CurveKind::interest);
    const auto hz = bootstrap_hazards({{1.0, 5.0}, {0.0, 0.0}, 0.4}, discount);
    for (double h : hz.rates())
        CHECK(h == 0.0);
}

TEST_CASE("single quote bootstrap is near the credit triangle") {
    const auto discount = TermStructure::flat(0.03, 10.0, CurveKind::interest);
    const auto hz = bootstrap_hazards({{5.0}, {0.006}, 0.7}, discount);
    CHECK(hz.rate_at(1.0) == doctest::Approx(0.006 / 0.3).epsilon(0.01));
}

TEST_CASE("bootstrap round trip reprices every quote") {
    const TermStructure discount({0.0, 0.7, 3.0, 12.0}, {0.02, 0.035, 0.03}, CurveKind::interest);
    const CdsQuoteStrip quotes{{0.5, 1.0, 3.0, 5.0, 7.0, 10.0}, {0.004, 0.0045, 0.006, 0.0072, 0.008, 0.0085}, 0.4};
    const auto hz = bootstrap_hazards(quotes, discount);
    for (std::size_t i = 0; i < quotes.maturities.size(); ++i)
        CHECK(std::abs(cds_par_spread(hz, discount, quotes.recovery, quotes.maturities[i]) - quotes.spreads[i]) <
              1e-10);
}

TEST_CASE("par spread against quadrature of the two legs") {
    const auto discount = TermStructure::flat(0.025, 10.0, CurveKind::interest);
    const TermStructure hz({0.0, 1.0, 4.0}, {0.01, 0.03}, CurveKind::hazard);
    const double T = 3.0;
    auto d = [&](double u) { return discount_factor(discount, 0.0, u) * survival_probability(hz, 0.0, u); };
    const double premium = oracle::simpson_pieces(d, std::vector<double>{0.0, 1.0, T});
    const double protection = oracle::simpson_pieces([&](double u) { return d(u) * hz.rate_at(u); },
                                                     std::vector<double>{0.0, 1.0, T});
    CHECK(cds_par_spread(hz, discount, 0.4, T) == doctest::Approx(0.6 * protection / premium).epsilon(1e-9));
}

TEST_CASE("arbitrage-inconsistent strip is rejected") {
    const auto discount = TermStructure::flat(0.03, 10.0, CurveKind::interest);
    CHECK_THROWS_AS(bootstrap_hazards({{1.0, 2.0}, {0.02, 0.001}, 0.4}, discount), NumericalError);
}
