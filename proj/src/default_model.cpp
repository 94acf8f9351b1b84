#include "cva/default_model.hpp"

#include "cva/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cva {

namespace {

// Round-off allowance when a cell sits exactly on a feasibility boundary
// (e.g. rho = 1 with equal marginals).
constexpr double cell_slack = 1e-14;

bool is_fraction(double x) { return x >= 0.0 && x <= 1.0; }

void check_probability(double q, const char* what) {
    if (!is_fraction(q))
        throw InputError(std::string("default_model: ") + what + " outside [0,1]");
}

void check_cell(double rho, const char* name, double& cell) {
    if (cell < -cell_slack || cell > 1.0 + cell_slack)
        throw InfeasibleCorrelation(rho, name, cell);
    cell = std::clamp(cell, 0.0, 1.0);
}

} // namespace

void RecoveryProfile::validate() const {
    if (!is_fraction(phi_a) || !is_fraction(phi_b) || !is_fraction(phibar_a) || !is_fraction(phibar_b) ||
        !is_fraction(phi_ab))
        throw InputError("default_model: recovery fractions must lie in [0,1]");
}

JointDefaultLaw joint_default_distribution(double q_a, double q_b, double rho) {
    check_probability(q_a, "q_a");
    check_probability(q_b, "q_b");
    if (!(rho >= -1.0 && rho <= 1.0))
        throw InfeasibleCorrelation(rho, "rho", rho);

    JointDefaultLaw law;
    law.q_a = q_a;
    law.q_b = q_b;
    law.rho = rho;
    const double s_a = 1.0 - q_a;
    const double s_b = 1.0 - q_b;
    law.gamma = rho * std::sqrt(q_a * s_a * q_b * s_b);
    law.p11 = q_b * q_a + law.gamma;
    law.p10 = s_b * q_a - law.gamma;
    law.p01 = q_b * s_a - law.gamma;
    law.p00 = s_b * s_a + law.gamma;
    check_cell(rho, "p11", law.p11);
    check_cell(rho, "p10", law.p10);
    check_cell(rho, "p01", law.p01);
    check_cell(rho, "p00", law.p00);
    return law;
}

CorrelationRange rho_feasible_range(double q_a, double q_b) {
    check_probability(q_a, "q_a");
    check_probability(q_b, "q_b");
    if (q_a <= 0.0 || q_a >= 1.0 || q_b <= 0.0 || q_b >= 1.0)
        return {0.0, 0.0};
    const double s_a = 1.0 - q_a;
    const double s_b = 1.0 - q_b;
    const double k = std::sqrt(q_a * s_a * q_b * s_b);
    // p10, p01 >= 0 bound rho from above; p11, p00 >= 0 from below.
    double hi = std::min(q_a * s_b, s_a * q_b) / k;
    double lo = -std::min(q_a * q_b, s_a * s_b) / k;
    return {std::max(lo, -1.0), std::min(hi, 1.0)};
}

StepSpreads bilateral_step_spreads(double h_a, double h_b, const RecoveryProfile& rec, double rho, double dt,
                                   CrossTermForm form) {
    if (!(h_a >= 0.0) || !(h_b >= 0.0))
        throw InputError("default_model: hazard rates must be non-negative");
    if (!(dt > 0.0))
        throw InputError("default_model: step length must be positive");
    if (h_a * dt > 1.0 || h_b * dt > 1.0)
        throw NumericalError("default_model: step too coarse for hazard level (h*dt > 1)");
    rec.validate();
    // the per-step Bernoulli law must exist for the requested correlation
    joint_default_distribution(h_a * dt, h_b * dt, rho);

    const double cross = rho * std::sqrt(h_a * h_b * (1.0 - h_b * dt) * (1.0 - h_a * dt)) + h_b * h_a * dt;
    const double k_b = 1.0 - rec.phi_b - rec.phibar_b + rec.phi_ab;
    const double k_a = form == CrossTermForm::a_indexed ? 1.0 - rec.phi_a - rec.phibar_a + rec.phi_ab : k_b;

    StepSpreads out;
    out.p_b = (1.0 - rec.phi_b) * h_b + (1.0 - rec.phibar_b) * h_a - k_b * cross;
    out.p_a = (1.0 - rec.phi_a) * h_a + (1.0 - rec.phibar_a) * h_b - k_a * cross;
    return out;
}

SettlementFactors dtm_settlement_factors(double s_a, double q_a, double s_b, double q_b, const RecoveryProfile& rec,
                                         double rho, CrossTermForm form) {
    if (std::abs(s_a + q_a - 1.0) > 1e-12 || std::abs(s_b + q_b - 1.0) > 1e-12)
        throw InputError("default_model: survival and default probabilities must sum to one");
    rec.validate();
    joint_default_distribution(q_a, q_b, rho);

    const double gamma = rho * std::sqrt(s_b * q_b * s_a * q_a);
    const double only_b = q_b * s_a - gamma;
    const double only_a = s_b * q_a - gamma;
    const double both = q_b * q_a + gamma;

    // Written as one minus the expected settlement shortfall so that zero
    // default probability or full recovery give exactly 1.
    SettlementFactors y;
    y.y_b = 1.0 - (1.0 - rec.phi_b) * only_b - (1.0 - rec.phibar_b) * only_a - (1.0 - rec.phi_ab) * both;
    y.y_a = 1.0 - (1.0 - rec.phi_a) * only_a - (1.0 - rec.phibar_a) * only_b - (1.0 - rec.phi_ab) * both;
    if (form == CrossTermForm::appendix_b_indexed)
        y.y_a += gamma * (rec.phi_a + rec.phibar_a - rec.phi_b - rec.phibar_b);
    return y;
}

} // namespace cva
