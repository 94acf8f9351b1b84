#include "cva/risky_discounting.hpp"

#include "cva/errors.hpp"

#include <string>

namespace cva {

namespace {
void check_fraction(double x, const char* what) {
    if (!(x >= 0.0 && x <= 1.0))
        throw InputError(std::string("risky_discounting: ") + what + " outside [0,1]");
}
} // namespace

double unilateral_ctm_rate(double r, double h_b, double phi_b, SignState sign) {
    if (!(h_b >= 0.0))
        throw InputError("risky_discounting: negative hazard rate");
    check_fraction(phi_b, "recovery");
    if (sign == SignState::negative)
        return r;
    return r + h_b * (1.0 - phi_b);
}

double unilateral_dtm_factor(double discount, double q_b, double phi_b, SignState payoff_sign) {
    if (!(discount > 0.0))
        throw InputError("risky_discounting: discount factor must be positive");
    check_fraction(q_b, "default probability");
    check_fraction(phi_b, "recovery");
    if (payoff_sign == SignState::negative)
        return discount;
    return discount * (1.0 - q_b * (1.0 - phi_b));
}

double bilateral_ctm_rate(double r, const StepSpreads& spreads, SignState sign) {
    return r + (sign == SignState::nonnegative ? spreads.p_b : spreads.p_a);
}

double bilateral_dtm_factor(double discount, const SettlementFactors& factors, SignState sign) {
    return discount * (sign == SignState::nonnegative ? factors.y_b : factors.y_a);
}

} // namespace cva
