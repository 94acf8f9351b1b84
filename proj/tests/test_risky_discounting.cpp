#include "cva/risky_discounting.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace cva;

TEST_CASE("unilateral continuous-time rate") {
    CHECK(unilateral_ctm_rate(0.03, 0.05, 0.4, SignState::negative) == 0.03);
    CHECK(unilateral_ctm_rate(0.03, 0.05, 1.0, SignState::nonnegative) == 0.03);
    CHECK(unilateral_ctm_rate(0.03, 0.05, 0.4, SignState::nonnegative) == doctest::Approx(0.03 + 0.05 * 0.6));
}

TEST_CASE("unilateral discrete-time factor") {
    CHECK(unilateral_dtm_factor(0.97, 0.0, 0.4, SignState::nonnegative) == 0.97);
    CHECK(unilateral_dtm_factor(0.97, 0.2, 0.4, SignState::negative) == 0.97);
    CHECK(unilateral_dtm_factor(0.99, 0.02, 0.7, SignState::nonnegative) ==
          doctest::Approx(0.99 * (1.0 - 0.02 * 0.3)).epsilon(1e-15));
    CHECK(unilateral_dtm_factor(0.99, 0.02, 0.7, SignState::nonnegative) == doctest::Approx(0.98406).epsilon(1e-15));
}

TEST_CASE("bilateral continuous-time rate") {
    CHECK(bilateral_ctm_rate(0.02, {0.0, 0.0}, SignState::nonnegative) == 0.02);
    CHECK(bilateral_ctm_rate(0.02, {0.01, 0.03}, SignState::nonnegative) == doctest::Approx(0.05));
    CHECK(bilateral_ctm_rate(0.02, {0.01, 0.03}, SignState::negative) == doctest::Approx(0.03));

    RecoveryProfile rec{0.3, 0.5, 0.4, 0.6, 0.0};
    const StepSpreads s = bilateral_step_spreads(0.02, 0.04, rec, 0.0, 1e-9);
    CHECK(bilateral_ctm_rate(0.01, s, SignState::nonnegative) ==
          doctest::Approx(0.01 + (1 - 0.5) * 0.04 + (1 - 0.6) * 0.02).epsilon(1e-9));
    CHECK(bilateral_ctm_rate(0.01, s, SignState::negative) ==
          doctest::Approx(0.01 + (1 - 0.3) * 0.02 + (1 - 0.4) * 0.04).epsilon(1e-9));
}

TEST_CASE("bilateral discrete-time factor") {
    CHECK(bilateral_dtm_factor(0.95, {1.0, 1.0}, SignState::negative) == 0.95);
    CHECK(bilateral_dtm_factor(0.95, {0.9, 0.8}, SignState::nonnegative) == doctest::Approx(0.95 * 0.8));
    CHECK(bilateral_dtm_factor(0.95, {0.9, 0.8}, SignState::negative) == doctest::Approx(0.95 * 0.9));
}

TEST_CASE("bilateral factor with default-free A is the unilateral factor") {
    oracle::Draw draw(31);
    for (int i = 0; i < 200; ++i) {
        RecoveryProfile rec{draw.uniform(0, 1), draw.uniform(0, 1), 1.0, 1.0, draw.uniform(0, 1)};
        const double d = draw.uniform(0.5, 1.0);
        const double q_b = draw.uniform(0, 0.5);
        const auto y = dtm_settlement_factors(1.0, 0.0, 1.0 - q_b, q_b, rec, 0.0);
        for (SignState s : {SignState::nonnegative, SignState::negative})
            CHECK(std::abs(bilateral_dtm_factor(d, y, s) - unilateral_dtm_factor(d, q_b, rec.phi_b, s)) < 1e-15);
    }
}

TEST_CASE("risky factors never exceed risk-free ones") {
    oracle::Draw draw(32);
    for (int i = 0; i < 200; ++i) {
        const double d = draw.uniform(0.5, 1.0);
        const double q = draw.uniform(0, 0.5);
        const double phi = draw.uniform(0, 0.999);
        CHECK(unilateral_dtm_factor(d, q, phi, SignState::nonnegative) <= d);
        CHECK(unilateral_ctm_rate(0.02, q, phi, SignState::nonnegative) >= 0.02);
    }
}

TEST_CASE("zero counts as non-negative") {
    CHECK(sign_of(0.0) == SignState::nonnegative);
    CHECK(sign_of(-0.0) == SignState::nonnegative);
    CHECK(sign_of(-1e-300) == SignState::negative);
}
