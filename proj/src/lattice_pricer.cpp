#include "cva/lattice_pricer.hpp"

#include "cva/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace cva {

namespace {
constexpr double node_tolerance = 1e-10;
constexpr std::size_t max_enumerated_payments = 6;
} // namespace

CashflowSchedule::CashflowSchedule(std::vector<Payment> payments) : payments_(std::move(payments)) {
    if (payments_.empty())
        throw InputError("lattice_pricer: empty cash-flow schedule");
    for (std::size_t i = 0; i < payments_.size(); ++i) {
        if (!std::isfinite(payments_[i].amount) || !std::isfinite(payments_[i].time))
            throw InputError("lattice_pricer: non-finite payment");
        if (i > 0 && !(payments_[i].time > payments_[i - 1].time))
            throw InputError("lattice_pricer: payment times must be strictly increasing");
    }
}

CashflowSchedule CashflowSchedule::fixed_coupon_bond(double principal, double coupon_rate, int frequency,
                                                     double maturity) {
    if (frequency <= 0 || !(maturity > 0.0))
        throw InputError("lattice_pricer: bond needs positive frequency and maturity");
    const auto periods = static_cast<long>(std::llround(maturity * frequency));
    if (periods < 1 || std::abs(periods - maturity * frequency) > 1e-9)
        throw InputError("lattice_pricer: maturity must be a whole number of coupon periods");
    std::vector<Payment> flows;
    const double coupon = principal * coupon_rate / frequency;
    for (long k = 1; k <= periods; ++k) {
        double t = static_cast<double>(k) / frequency;
        flows.push_back({t, k == periods ? coupon + principal : coupon});
    }
    return CashflowSchedule(std::move(flows));
}

CashflowSchedule CashflowSchedule::scaled(double factor) const {
    std::vector<Payment> flows = payments_;
    for (auto& p : flows)
        p.amount *= factor;
    return CashflowSchedule(std::move(flows));
}

PricingGrid PricingGrid::uniform(const CashflowSchedule& schedule, double valuation_time, double dt) {
    if (!(dt > 0.0))
        throw InputError("lattice_pricer: grid step must be positive");
    if (schedule.size() == 0)
        throw InputError("lattice_pricer: empty cash-flow schedule");
    if (!(schedule.payments().front().time > valuation_time))
        throw InputError("lattice_pricer: payments must follow the valuation time");

    PricingGrid grid;
    grid.dt_ = dt;
    grid.nodes_.push_back(valuation_time);
    double period_start = valuation_time;
    for (const Payment& p : schedule.payments()) {
        // regular nodes valuation_time + k*dt strictly inside the period
        auto k = static_cast<long long>(std::floor((period_start - valuation_time) / dt)) + 1;
        for (;; ++k) {
            double t = valuation_time + static_cast<double>(k) * dt;
            if (t >= p.time - node_tolerance)
                break;
            if (t > period_start + node_tolerance)
                grid.nodes_.push_back(t);
        }
        grid.nodes_.push_back(p.time);
        grid.payment_nodes_.push_back(grid.nodes_.size() - 1);
        period_start = p.time;
    }
    return grid;
}

PricingGrid PricingGrid::from_nodes(std::vector<double> nodes, const CashflowSchedule& schedule) {
    if (nodes.size() < 2)
        throw InputError("lattice_pricer: grid needs at least two nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw InputError("lattice_pricer: grid nodes must be strictly increasing");
    PricingGrid grid;
    grid.nodes_ = std::move(nodes);
    double smallest = grid.nodes_.back() - grid.nodes_.front();
    for (std::size_t i = 1; i < grid.nodes_.size(); ++i)
        smallest = std::min(smallest, grid.nodes_[i] - grid.nodes_[i - 1]);
    grid.dt_ = smallest;
    for (const Payment& p : schedule.payments()) {
        if (!(p.time > grid.nodes_.front()))
            throw InputError("lattice_pricer: payments must follow the valuation time");
        auto it = std::lower_bound(grid.nodes_.begin(), grid.nodes_.end(), p.time - node_tolerance);
        if (it == grid.nodes_.end() || std::abs(*it - p.time) > node_tolerance)
            throw InputError("lattice_pricer: misaligned grid, payment date is not a grid node");
        grid.payment_nodes_.push_back(static_cast<std::size_t>(it - grid.nodes_.begin()));
    }
    return grid;
}

std::vector<std::size_t> PricingGrid::steps_per_period() const {
    std::vector<std::size_t> counts;
    std::size_t previous = 0;
    for (std::size_t idx : payment_nodes_) {
        counts.push_back(idx - previous);
        previous = idx;
    }
    return counts;
}

double price_risk_free(const CashflowSchedule& schedule, const TermStructure& discount, double valuation_time) {
    double value = 0.0;
    for (const Payment& p : schedule.payments()) {
        if (!(p.time > valuation_time))
            throw InputError("lattice_pricer: payments must follow the valuation time");
        value += discount_factor(discount, valuation_time, p.time) * p.amount;
    }
    return value;
}

namespace {

ValuationResult roll_back_ctm(const CashflowSchedule& schedule, CreditSide side, const CreditInputs& in,
                              const PricingGrid& grid) {
    auto nodes = grid.nodes();
    auto pay_nodes = grid.payment_nodes();
    auto payments = schedule.payments();

    // flows[i] = cash flow paid at node i
    std::vector<double> flows(nodes.size(), 0.0);
    for (std::size_t k = 0; k < payments.size(); ++k)
        flows[pay_nodes[k]] = payments[k].amount;

    double risky = flows.back();
    double risk_free = flows.back();
    for (std::size_t i = nodes.size() - 1; i-- > 0;) {
        const double t0 = nodes[i];
        const double dt = nodes[i + 1] - t0;
        const double r = in.discount.integral(t0, nodes[i + 1]) / dt;
        const SignState sign = sign_of(risky);
        double rate = r;
        if (side == CreditSide::unilateral_b) {
            rate = unilateral_ctm_rate(r, in.hazard_b.rate_at(t0), in.recovery.phi_b, sign);
        } else {
            StepSpreads spreads = bilateral_step_spreads(in.hazard_a.rate_at(t0), in.hazard_b.rate_at(t0),
                                                         in.recovery, in.rho, dt, in.cross_term);
            rate = bilateral_ctm_rate(r, spreads, sign);
        }
        risky = std::exp(-rate * dt) * risky + flows[i];
        risk_free = std::exp(-r * dt) * risk_free + flows[i];
    }
    return {risk_free, risky, cva_from(risk_free, risky)};
}

ValuationResult roll_back_dtm(const CashflowSchedule& schedule, CreditSide side, const CreditInputs& in,
                              double valuation_time) {
    auto payments = schedule.payments();
    const std::size_t m = payments.size();

    double risky = payments[m - 1].amount;
    double risk_free = payments[m - 1].amount;
    for (std::size_t j = m; j-- > 0;) {
        const double start = j == 0 ? valuation_time : payments[j - 1].time;
        const double end = payments[j].time;
        const double discount = discount_factor(in.discount, start, end);
        const SignState sign = sign_of(risky);
        const double q_b = default_probability(in.hazard_b, start, end);
        double factor = discount;
        if (side == CreditSide::unilateral_b) {
            factor = unilateral_dtm_factor(discount, q_b, in.recovery.phi_b, sign);
        } else {
            const double q_a = default_probability(in.hazard_a, start, end);
            SettlementFactors y = dtm_settlement_factors(survival_probability(in.hazard_a, start, end), q_a,
                                                         survival_probability(in.hazard_b, start, end), q_b,
                                                         in.recovery, in.rho, in.cross_term);
            factor = bilateral_dtm_factor(discount, y, sign);
        }
        const double flow = j == 0 ? 0.0 : payments[j - 1].amount;
        risky = factor * risky + flow;
        risk_free = discount * risk_free + flow;
    }
    return {risk_free, risky, cva_from(risk_free, risky)};
}

} // namespace

ValuationResult price_risky(const CashflowSchedule& schedule, ModelRegime regime, const CreditInputs& inputs,
                            const PricingGrid& grid) {
    if (schedule.size() == 0)
        throw InputError("lattice_pricer: empty cash-flow schedule");
    inputs.recovery.validate();
    // grid must carry exactly this schedule's payment dates
    PricingGrid::from_nodes(std::vector<double>(grid.nodes().begin(), grid.nodes().end()), schedule);
    if (grid.payment_nodes().size() != schedule.size() || grid.payment_nodes().back() != grid.nodes().size() - 1)
        throw InputError("lattice_pricer: misaligned grid, last node must be the last payment");
    if (regime.timing == Timing::ctm)
        return roll_back_ctm(schedule, regime.credit_side, inputs, grid);
    return roll_back_dtm(schedule, regime.credit_side, inputs, grid.valuation_time());
}

double enumerate_default_states(const CashflowSchedule& schedule, CreditSide side, const CreditInputs& in,
                                double valuation_time) {
    auto payments = schedule.payments();
    const std::size_t m = payments.size();
    if (m == 0)
        throw InputError("lattice_pricer: empty cash-flow schedule");
    if (m > max_enumerated_payments)
        throw InputError("lattice_pricer: enumeration limited to six payments");
    in.recovery.validate();
    const RecoveryProfile& rec = in.recovery;

    // Per-period state probabilities. State 0 is "both survive"; the rest are
    // default states that terminate the contract.
    enum State { survive = 0, b_only = 1, a_only = 2, both = 3 };
    const std::size_t n_states = side == CreditSide::bilateral ? 4 : 2;
    std::vector<std::array<double, 4>> prob(m);
    std::vector<double> disc(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double start = j == 0 ? valuation_time : payments[j - 1].time;
        const double end = payments[j].time;
        disc[j] = discount_factor(in.discount, start, end);
        const double q_b = default_probability(in.hazard_b, start, end);
        if (side == CreditSide::bilateral) {
            const double q_a = default_probability(in.hazard_a, start, end);
            JointDefaultLaw law = joint_default_distribution(q_a, q_b, in.rho);
            prob[j] = {law.p00, law.p01, law.p10, law.p11};
        } else {
            prob[j] = {1.0 - q_b, q_b, 0.0, 0.0};
        }
    }

    // Fraction of the outstanding value W that A ends up with in a default
    // state, following the settlement rules.
    auto settlement = [&](int state, double w) {
        const bool asset = w >= 0.0;
        if (side == CreditSide::unilateral_b)
            return asset ? rec.phi_b : 1.0;
        switch (state) {
        case b_only:
            return asset ? rec.phi_b : rec.phibar_a;
        case a_only:
            return asset ? rec.phibar_b : rec.phi_a;
        default:
            return rec.phi_ab;
        }
    };

    // continuation[j] = risky value at payments[j-1].time of flows after it
    std::vector<double> continuation(m + 1, 0.0);
    for (std::size_t first = m; first-- > 0;) {
        const std::size_t len = m - first;
        std::size_t sequences = 1;
        for (std::size_t k = 0; k < len; ++k)
            sequences *= n_states;
        double total = 0.0;
        for (std::size_t code = 0; code < sequences; ++code) {
            std::size_t c = code;
            double p = 1.0;
            double value = 0.0;
            double df = 1.0;
            bool alive = true;
            for (std::size_t k = 0; k < len; ++k) {
                const std::size_t j = first + k;
                const auto state = static_cast<int>(c % n_states);
                c /= n_states;
                p *= prob[j][static_cast<std::size_t>(state)];
                if (!alive)
                    continue;
                df *= disc[j];
                if (state == survive) {
                    value += df * payments[j].amount;
                } else {
                    const double w = payments[j].amount + continuation[j + 1];
                    value += df * settlement(state, w) * w;
                    alive = false;
                }
            }
            total += p * value;
        }
        continuation[first] = total;
    }
    return continuation[0];
}

} // namespace cva
