#pragma once

#include "cva/default_model.hpp"
#include "cva/risky_discounting.hpp"
#include "cva/term_structures.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace cva {

struct Payment {
    double time = 0.0;
    double amount = 0.0;
};

/// Signed cash flows received by party A, strictly increasing in time.
class CashflowSchedule {
public:
    CashflowSchedule() = default;
    explicit CashflowSchedule(std::vector<Payment> payments);

    /// Coupon bond: `coupon_rate / frequency` per period plus principal at
    /// maturity.
    static CashflowSchedule fixed_coupon_bond(double principal, double coupon_rate, int frequency, double maturity);

    std::span<const Payment> payments() const noexcept { return payments_; }
    std::size_t size() const noexcept { return payments_.size(); }
    double last_time() const { return payments_.back().time; }
    CashflowSchedule scaled(double factor) const;

private:
    std::vector<Payment> payments_;
};

/// Time nodes for backward induction. Payment dates are always nodes; a
/// regular lattice of spacing `dt` anchored at the valuation time fills each
/// payment period, so the last step of a period may be shorter.
class PricingGrid {
public:
    static PricingGrid uniform(const CashflowSchedule& schedule, double valuation_time, double dt);
    /// Explicit nodes; throws InputError if a payment date is not a node.
    static PricingGrid from_nodes(std::vector<double> nodes, const CashflowSchedule& schedule);

    double valuation_time() const { return nodes_.front(); }
    double dt() const noexcept { return dt_; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    /// Node index of each payment.
    std::span<const std::size_t> payment_nodes() const noexcept { return payment_nodes_; }
    /// Number of steps inside each payment period.
    std::vector<std::size_t> steps_per_period() const;

private:
    PricingGrid() = default;
    std::vector<double> nodes_;
    std::vector<std::size_t> payment_nodes_;
    double dt_ = 0.0;
};

/// Deterministic market and credit inputs shared by the lattice routines.
struct CreditInputs {
    TermStructure discount = TermStructure::flat(0.0, 1.0, CurveKind::interest);
    TermStructure hazard_a = TermStructure::flat(0.0, 1.0, CurveKind::hazard);
    TermStructure hazard_b = TermStructure::flat(0.0, 1.0, CurveKind::hazard);
    RecoveryProfile recovery;
    double rho = 0.0;
    CrossTermForm cross_term = CrossTermForm::a_indexed;
};

struct ValuationResult {
    double risk_free = 0.0;
    double risky = 0.0;
    double cva = 0.0;
};

double price_risk_free(const CashflowSchedule& schedule, const TermStructure& discount, double valuation_time = 0.0);

/// Backward induction under one regime. CTM steps over every grid node,
/// sampling hazards at the left node and discounting each step exactly;
/// the spread switches on the sign of the value at the next node (cash flow
/// included on payment nodes). DTM steps over payment periods and switches
/// on the sign of cash flow plus risky continuation.
ValuationResult price_risky(const CashflowSchedule& schedule, ModelRegime regime, const CreditInputs& inputs,
                            const PricingGrid& grid);

/// Discrete-time value by brute-force expansion of every default-state
/// sequence over the payment dates. Limited to six payments.
double enumerate_default_states(const CashflowSchedule& schedule, CreditSide side, const CreditInputs& inputs,
                                double valuation_time = 0.0);

constexpr double cva_from(double risk_free, double risky) noexcept { return risk_free - risky; }

} // namespace cva
