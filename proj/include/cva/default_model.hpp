#pragma once

namespace cva {

/// Recovery fractions for the two parties. `phi_*` is paid by a defaulting
/// party that owes money; `phibar_*` is paid by a surviving party that owes
/// money to a defaulter (0 = one-way settlement, 1 = two-way settlement);
/// `phi_ab` applies when both default together.
struct RecoveryProfile {
    double phi_a = 0.0;
    double phi_b = 0.0;
    double phibar_a = 1.0;
    double phibar_b = 1.0;
    double phi_ab = 0.0;

    void validate() const;
};

/// Four-cell bivariate Bernoulli law of the default indicators. Cells are
/// indexed (A, B): p10 means A defaults and B survives.
struct JointDefaultLaw {
    double q_a = 0.0;
    double q_b = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    double p11 = 0.0;
    double p10 = 0.0;
    double p01 = 0.0;
    double p00 = 1.0;
};

JointDefaultLaw joint_default_distribution(double q_a, double q_b, double rho);

struct CorrelationRange {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double rho) const noexcept { return rho >= lo && rho <= hi; }
};

/// Largest correlation interval keeping every cell of the joint law in [0,1].
/// Degenerate marginals (0 or 1) give [0,0].
CorrelationRange rho_feasible_range(double q_a, double q_b);

/// Which recovery set multiplies the joint-default correction in the
/// A-branch (spread p_A, settlement factor y_A). The printed appendix uses
/// B-indexed recoveries there; the main-text form is A-indexed and is the
/// one consistent with the four-state expectation.
enum class CrossTermForm { a_indexed, appendix_b_indexed };

struct StepSpreads {
    double p_a = 0.0;
    double p_b = 0.0;
};

/// Risk-adjusted spreads for one small step of length dt in the bilateral
/// continuous-time model. Requires h_j * dt <= 1.
StepSpreads bilateral_step_spreads(double h_a, double h_b, const RecoveryProfile& rec, double rho,
                                   double dt, CrossTermForm form = CrossTermForm::a_indexed);

struct SettlementFactors {
    double y_a = 1.0;
    double y_b = 1.0;
};

/// Expected settlement fraction over one discrete period, given the period's
/// survival/default probabilities. y_b applies when the value is an asset to
/// A, y_a when it is a liability.
SettlementFactors dtm_settlement_factors(double s_a, double q_a, double s_b, double q_b,
                                         const RecoveryProfile& rec, double rho,
                                         CrossTermForm form = CrossTermForm::a_indexed);

} // namespace cva
