#include "cva/term_structures.hpp"

#include "cva/errors.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace cva {

namespace {
// Slack for "t equals the horizon" when t comes from accumulated arithmetic.
constexpr double time_slack = 1e-12;
} // namespace

TermStructure::TermStructure(std::vector<double> node_times, std::vector<double> rates, CurveKind kind)
    : times_(std::move(node_times)), rates_(std::move(rates)), kind_(kind) {
    if (times_.size() < 2)
        throw InputError("term_structures: a curve needs at least two node times");
    if (rates_.size() != times_.size() - 1)
        throw InputError("term_structures: expected one rate per interval");
    if (times_.front() != 0.0)
        throw InputError("term_structures: first node time must be 0");
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1]))
            throw InputError("term_structures: node times must be strictly increasing");
    }
    for (double r : rates_) {
        if (!std::isfinite(r))
            throw InputError("term_structures: non-finite rate");
        if (kind_ == CurveKind::hazard && r < 0.0)
            throw InputError("term_structures: hazard rates must be non-negative");
    }
    cumulative_.resize(times_.size());
    cumulative_[0] = 0.0;
    for (std::size_t i = 0; i < rates_.size(); ++i)
        cumulative_[i + 1] = cumulative_[i] + rates_[i] * (times_[i + 1] - times_[i]);
}

TermStructure TermStructure::flat(double rate, double horizon, CurveKind kind) {
    return TermStructure({0.0, horizon}, {rate}, kind);
}

std::size_t TermStructure::segment_of(double t) const {
    if (t < 0.0)
        throw InputError("term_structures: negative time");
    if (t > horizon() + time_slack)
        throw HorizonError(t, horizon());
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    auto idx = static_cast<std::size_t>(it - times_.begin());
    // idx is in [1, size]; segment is idx-1, clipped to the last one
    return std::min(idx - 1, rates_.size() - 1);
}

double TermStructure::rate_at(double t) const { return rates_[segment_of(t)]; }

void TermStructure::check_interval(double t, double s) const {
    if (s < t)
        throw InputError("term_structures: reversed interval");
    if (s > horizon() + time_slack)
        throw HorizonError(s, horizon());
    if (t < 0.0)
        throw InputError("term_structures: negative time");
}

double TermStructure::integral(double t, double s) const {
    check_interval(t, s);
    if (s == t)
        return 0.0;
    auto primitive = [this](double u) {
        std::size_t k = segment_of(u);
        return cumulative_[k] + rates_[k] * (u - times_[k]);
    };
    // Same-segment intervals avoid cancellation between large cumulatives.
    std::size_t kt = segment_of(t);
    std::size_t ks = segment_of(s);
    if (kt == ks)
        return rates_[kt] * (s - t);
    return primitive(s) - primitive(t);
}

double discount_factor(const TermStructure& curve, double t, double s) {
    return std::exp(-curve.integral(t, s));
}

double survival_probability(const TermStructure& curve, double t, double s) {
    return std::exp(-curve.integral(t, s));
}

double default_probability(const TermStructure& curve, double t, double s) {
    return -std::expm1(-curve.integral(t, s));
}

void CdsQuoteStrip::validate() const {
    if (maturities.empty())
        throw InputError("term_structures: empty CDS strip");
    if (maturities.size() != spreads.size())
        throw InputError("term_structures: CDS maturities and spreads differ in length");
    if (!(recovery >= 0.0 && recovery <= 1.0))
        throw InputError("term_structures: CDS recovery outside [0,1]");
    for (std::size_t i = 0; i < maturities.size(); ++i) {
        if (!(maturities[i] > (i == 0 ? 0.0 : maturities[i - 1])))
            throw InputError("term_structures: CDS maturities must be positive and strictly increasing");
        if (!(spreads[i] >= 0.0))
            throw InputError("term_structures: negative CDS spread");
    }
}

namespace {

struct LegIntegrals {
    double annuity = 0.0;    // integral of D(0,u) S(0,u) du
    double protection = 0.0; // integral of D(0,u) S(0,u) h(u) du
};

// (1 - exp(-k*dt)) / k, continuous at k = 0.
double decay_integral(double k, double dt) {
    if (k == 0.0)
        return dt;
    return -std::expm1(-k * dt) / k;
}

LegIntegrals cds_legs(const TermStructure& hazard, const TermStructure& discount, double maturity) {
    std::vector<double> cuts{0.0, maturity};
    for (double t : hazard.node_times())
        if (t > 0.0 && t < maturity)
            cuts.push_back(t);
    for (double t : discount.node_times())
        if (t > 0.0 && t < maturity)
            cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    LegIntegrals legs;
    double log_weight = 0.0; // log of D(0,u) S(0,u) at the segment start
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i];
        double b = cuts[i + 1];
        double mid = 0.5 * (a + b);
        double h = hazard.rate_at(mid);
        double r = discount.rate_at(mid);
        double piece = std::exp(log_weight) * decay_integral(r + h, b - a);
        legs.annuity += piece;
        legs.protection += h * piece;
        log_weight -= (r + h) * (b - a);
    }
    return legs;
}

} // namespace

double cds_par_spread(const TermStructure& hazard, const TermStructure& discount, double recovery,
                      double maturity) {
    if (!(maturity > 0.0))
        throw InputError("term_structures: CDS maturity must be positive");
    LegIntegrals legs = cds_legs(hazard, discount, maturity);
    return (1.0 - recovery) * legs.protection / legs.annuity;
}

TermStructure bootstrap_hazards(const CdsQuoteStrip& quotes, const TermStructure& discount) {
    quotes.validate();
    if (discount.kind() != CurveKind::interest)
        throw InputError("term_structures: bootstrap needs an interest-rate discount curve");
    if (quotes.maturities.back() > discount.horizon() + time_slack)
        throw HorizonError(quotes.maturities.back(), discount.horizon());

    const double lgd = 1.0 - quotes.recovery;
    std::vector<double> times{0.0};
    std::vector<double> rates;

    for (std::size_t i = 0; i < quotes.maturities.size(); ++i) {
        const double maturity = quotes.maturities[i];
        const double spread = quotes.spreads[i];
        if (lgd == 0.0 && spread > 0.0)
            throw BootstrapError(i, "positive spread with full recovery");

        auto curve_with = [&](double h) {
            std::vector<double> t = times;
            std::vector<double> r = rates;
            t.push_back(maturity);
            r.push_back(h);
            return TermStructure(std::move(t), std::move(r), CurveKind::hazard);
        };
        // PV(protection) - spread * PV(premium); increasing in h.
        auto value = [&](double h) {
            LegIntegrals legs = cds_legs(curve_with(h), discount, maturity);
            return lgd * legs.protection - spread * legs.annuity;
        };

        double at_zero = value(0.0);
        double scale = std::max(spread, lgd * 1e-4) * maturity;
        double h_root = 0.0;
        if (at_zero > 1e-15 * scale) {
            throw BootstrapError(i, "negative implied hazard (strip is arbitrage-inconsistent)");
        } else if (at_zero < -1e-15 * scale) {
            double hi = std::max(1.0, 10.0 * spread / std::max(lgd, 1e-12));
            double at_hi = value(hi);
            while (at_hi <= 0.0 && hi < 1e4) {
                hi *= 4.0;
                at_hi = value(hi);
            }
            if (at_hi <= 0.0)
                throw BootstrapError(i, "no hazard level reprices the quote");
            std::uintmax_t max_iter = 300;
            auto tol = boost::math::tools::eps_tolerance<double>(std::numeric_limits<double>::digits - 3);
            auto bracket = boost::math::tools::toms748_solve(value, 0.0, hi, at_zero, at_hi, tol, max_iter);
            if (max_iter >= 300)
                throw BootstrapError(i, "root search did not converge");
            h_root = 0.5 * (bracket.first + bracket.second);
        }
        times.push_back(maturity);
        rates.push_back(h_root);
    }
    return TermStructure(std::move(times), std::move(rates), CurveKind::hazard);
}

} // namespace cva
