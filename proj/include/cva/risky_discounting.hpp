#pragma once

#include "cva/default_model.hpp"

namespace cva {

enum class CreditSide { unilateral_b, bilateral };
enum class Timing { ctm, dtm };

/// One of the four valuation regimes. Unilateral regimes treat party A as
/// default-free and ignore every party-A input.
struct ModelRegime {
    CreditSide credit_side = CreditSide::bilateral;
    Timing timing = Timing::dtm;
};

/// Sign of the forward-looking value being discounted; zero counts as
/// non-negative.
enum class SignState { nonnegative, negative };

constexpr SignState sign_of(double value) noexcept {
    return value >= 0.0 ? SignState::nonnegative : SignState::negative;
}

// Continuous-time regimes return instantaneous rates to be integrated by the
// caller; discrete-time regimes return whole-period discount factors.

double unilateral_ctm_rate(double r, double h_b, double phi_b, SignState sign);

double unilateral_dtm_factor(double discount, double q_b, double phi_b, SignState payoff_sign);

double bilateral_ctm_rate(double r, const StepSpreads& spreads, SignState sign);

double bilateral_dtm_factor(double discount, const SettlementFactors& factors, SignState sign);

} // namespace cva
