#include "cva/default_model.hpp"
#include "cva/errors.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <array>
#include <cmath>

using namespace cva;

namespace {

bool cells_valid(double q_a, double q_b, double rho) {
    const double g = rho * std::sqrt(q_a * (1 - q_a) * q_b * (1 - q_b));
    const std::array<double, 4> cells{q_a * q_b + g, q_a * (1 - q_b) - g, (1 - q_a) * q_b - g,
                                      (1 - q_a) * (1 - q_b) + g};
    for (double c : cells)
        if (c < -1e-15 || c > 1 + 1e-15)
            return false;
    return true;
}

// Settlement fraction received by A in each default state, value sign given.
double state_weight(int a_defaults, int b_defaults, bool asset, const RecoveryProfile& r) {
    if (!a_defaults && !b_defaults)
        return 1.0;
    if (a_defaults && b_defaults)
        return r.phi_ab;
    if (b_defaults)
        return asset ? r.phi_b : r.phibar_a;
    return asset ? r.phibar_b : r.phi_a;
}

} // namespace

TEST_CASE("independent joint law") {
    const auto law = joint_default_distribution(0.1, 0.2, 0.0);
    CHECK(law.p11 == doctest::Approx(0.02).epsilon(1e-15));
    CHECK(law.p10 == doctest::Approx(0.08).epsilon(1e-15));
    CHECK(law.p01 == doctest::Approx(0.18).epsilon(1e-15));
    CHECK(law.p00 == doctest::Approx(0.72).epsilon(1e-15));
}

TEST_CASE("comonotone joint law hits the upper bound") {
    const auto law = joint_default_distribution(0.1, 0.1, 1.0);
    CHECK(law.gamma == doctest::Approx(0.09).epsilon(1e-14));
    CHECK(law.p11 == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(std::abs(law.p10) < 1e-15);
    CHECK(std::abs(law.p01) < 1e-15);
    CHECK(law.p00 == doctest::Approx(0.9).epsilon(1e-14));
}

TEST_CASE("cells sum to one with exact marginals") {
    oracle::Draw draw(21);
    for (int i = 0; i < 2000; ++i) {
        const double q_a = draw.uniform(0.0, 1.0);
        const double q_b = draw.uniform(0.0, 1.0);
        const auto range = rho_feasible_range(q_a, q_b);
        const double rho = draw.uniform(range.lo, range.hi);
        const auto law = joint_default_distribution(q_a, q_b, rho);
        CHECK(std::abs(law.p00 + law.p01 + law.p10 + law.p11 - 1.0) < 1e-15);
        CHECK(std::abs(law.p11 + law.p10 - q_a) < 1e-15);
        CHECK(std::abs(law.p11 + law.p01 - q_b) < 1e-15);
    }
}

TEST_CASE("infeasible correlation names the violated cell") {
    try {
        joint_default_distribution(0.01, 0.5, 0.9);
        FAIL("expected InfeasibleCorrelation");
    } catch (const InfeasibleCorrelation& e) {
        CHECK(e.cell() == "p10");
    }
}

TEST_CASE("feasible range matches a brute-force scan") {
    CHECK(rho_feasible_range(0.5, 0.5).lo == doctest::Approx(-1.0));
    CHECK(rho_feasible_range(0.5, 0.5).hi == doctest::Approx(1.0));
    CHECK(rho_feasible_range(0.0, 0.3).lo == 0.0);
    CHECK(rho_feasible_range(0.0, 0.3).hi == 0.0);

    oracle::Draw draw(22);
    for (int i = 0; i < 40; ++i) {
        const double q_a = draw.uniform(0.001, 0.999);
        const double q_b = i % 4 == 0 ? q_a : draw.uniform(0.001, 0.999);
        double lo = 2.0;
        double hi = -2.0;
        const int n = 200000;
        for (int k = 0; k <= n; ++k) {
            const double rho = -1.0 + 2.0 * k / n;
            if (cells_valid(q_a, q_b, rho)) {
                lo = std::min(lo, rho);
                hi = std::max(hi, rho);
            }
        }
        const auto range = rho_feasible_range(q_a, q_b);
        CHECK(range.lo == doctest::Approx(lo).epsilon(2e-5).scale(1.0));
        CHECK(range.hi == doctest::Approx(hi).epsilon(2e-5).scale(1.0));
        CHECK(range.contains(0.0));
        if (q_a == q_b)
            CHECK(range.hi == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("step spreads without correlation or joint default") {
    RecoveryProfile rec{0.3, 0.6, 0.2, 0.5, 0.0};
    const double h_a = 0.03;
    const double h_b = 0.05;
    const double limit = (1 - rec.phi_b) * h_b + (1 - rec.phibar_b) * h_a;
    double previous = 1.0;
    for (double dt : {1.0 / 12, 1.0 / 52, 1.0 / 365, 1.0 / 3650}) {
        const double err = std::abs(bilateral_step_spreads(h_a, h_b, rec, 0.0, dt).p_b - limit);
        CHECK(err < previous);
        CHECK(err <= 1.01 * std::abs(1 - rec.phi_b - rec.phibar_b) * h_a * h_b * dt);
        previous = err;
    }
}

TEST_CASE("step spreads with a default-free party A") {
    oracle::Draw draw(23);
    for (int i = 0; i < 100; ++i) {
        RecoveryProfile rec{draw.uniform(0, 1), draw.uniform(0, 1), draw.uniform(0, 1), 1.0, draw.uniform(0, 1)};
        const double h_b = draw.uniform(0, 0.2);
        const auto s = bilateral_step_spreads(0.0, h_b, rec, draw.uniform(-1, 1), 1.0 / 365);
        CHECK(std::abs(s.p_b - (1 - rec.phi_b) * h_b) < 1e-15);
    }
}

TEST_CASE("step spreads against direct evaluation") {
    RecoveryProfile rec{0.4, 0.7, 1.0, 1.0, 0.0};
    const double h = 0.02;
    const double rho = 0.5;
    const double dt = 1.0 / 52;
    const double cross = rho * std::sqrt(h * h * (1 - h * dt) * (1 - h * dt)) + h * h * dt;
    const double p_b = (1 - 0.7) * h + (1 - 1.0) * h - (1 - 0.7 - 1.0 + 0.0) * cross;
    const double p_a = (1 - 0.4) * h + (1 - 1.0) * h - (1 - 0.4 - 1.0 + 0.0) * cross;
    const auto s = bilateral_step_spreads(h, h, rec, rho, dt);
    CHECK(s.p_b == doctest::Approx(p_b).epsilon(1e-14));
    CHECK(s.p_a == doctest::Approx(p_a).epsilon(1e-14));

    const auto appendix = bilateral_step_spreads(h, h, rec, rho, dt, CrossTermForm::appendix_b_indexed);
    CHECK(appendix.p_a == doctest::Approx((1 - 0.4) * h - (1 - 0.7 - 1.0) * cross).epsilon(1e-14));
}

TEST_CASE("step too coarse for the hazard level") {
    CHECK_THROWS_AS(bilateral_step_spreads(0.1, 2.0, {}, 0.0, 1.0), NumericalError);
}

TEST_CASE("settlement factors without default risk") {
    oracle::Draw draw(24);
    for (int i = 0; i < 20; ++i) {
        RecoveryProfile rec{draw.uniform(0, 1), draw.uniform(0, 1), draw.uniform(0, 1), draw.uniform(0, 1),
                            draw.uniform(0, 1)};
        const auto y = dtm_settlement_factors(1.0, 0.0, 1.0, 0.0, rec, draw.uniform(-1, 1));
        CHECK(y.y_a == 1.0);
        CHECK(y.y_b == 1.0);
    }
}

TEST_CASE("settlement factors for independent parties without joint default") {
    RecoveryProfile rec{0.35, 0.45, 0.2, 0.8, 0.0};
    const double q_a = 0.04;
    const double q_b = 0.07;
    const double s_a = 1 - q_a;
    const double s_b = 1 - q_b;
    const auto y = dtm_settlement_factors(s_a, q_a, s_b, q_b, rec, 0.0);
    CHECK(y.y_b == doctest::Approx(s_b * s_a + rec.phi_b * q_b * s_a + rec.phibar_b * s_b * q_a).epsilon(1e-15));
    CHECK(y.y_a == doctest::Approx(s_b * s_a + rec.phi_a * q_a * s_b + rec.phibar_a * s_a * q_b).epsilon(1e-15));
}

TEST_CASE("settlement factors equal the four-state expectation") {
    oracle::Draw draw(25);
    for (int i = 0; i < 500; ++i) {
        RecoveryProfile rec{draw.uniform(0, 1), draw.uniform(0, 1), draw.uniform(0, 1), draw.uniform(0, 1),
                            draw.uniform(0, 1)};
        const double q_a = draw.uniform(0, 0.5);
        const double q_b = draw.uniform(0, 0.5);
        const auto range = rho_feasible_range(q_a, q_b);
        const double rho = draw.uniform(range.lo, range.hi);
        const auto law = joint_default_distribution(q_a, q_b, rho);
        const std::array<std::array<double, 2>, 2> p{{{law.p00, law.p01}, {law.p10, law.p11}}};
        double e_asset = 0.0;
        double e_liability = 0.0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                e_asset += p[a][b] * state_weight(a, b, true, rec);
                e_liability += p[a][b] * state_weight(a, b, false, rec);
            }
        const auto y = dtm_settlement_factors(1 - q_a, q_a, 1 - q_b, q_b, rec, rho);
        CHECK(std::abs(y.y_b - e_asset) < 1e-14);
        CHECK(std::abs(y.y_a - e_liability) < 1e-14);
        CHECK(y.y_b >= 0.0);
        CHECK(y.y_b <= 1.0);
    }
}

TEST_CASE("settlement factors are non-decreasing in every recovery") {
    RecoveryProfile base{0.3, 0.3, 0.3, 0.3, 0.3};
    const auto y0 = dtm_settlement_factors(0.9, 0.1, 0.85, 0.15, base, 0.2);
    for (double RecoveryProfile::*field : {&RecoveryProfile::phi_a, &RecoveryProfile::phi_b,
                                           &RecoveryProfile::phibar_a, &RecoveryProfile::phibar_b,
                                           &RecoveryProfile::phi_ab}) {
        RecoveryProfile up = base;
        up.*field = 0.6;
        const auto y = dtm_settlement_factors(0.9, 0.1, 0.85, 0.15, up, 0.2);
        CHECK(y.y_a >= y0.y_a);
        CHECK(y.y_b >= y0.y_b);
    }
}
