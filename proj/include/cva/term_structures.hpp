#pragma once

#include <span>
#include <vector>

namespace cva {

enum class CurveKind { interest, hazard };

/// Piecewise-constant rate curve on year fractions (ACT/365F).
///
/// `node_times` starts at 0 and is strictly increasing; `rates[i]` applies on
/// [node_times[i], node_times[i+1]). The last node is the curve horizon.
/// Integrals are exact sums over segments, so discount and survival factors
/// carry no quadrature error.
class TermStructure {
public:
    TermStructure(std::vector<double> node_times, std::vector<double> rates, CurveKind kind);

    static TermStructure flat(double rate, double horizon, CurveKind kind);

    CurveKind kind() const noexcept { return kind_; }
    double horizon() const noexcept { return times_.back(); }
    std::span<const double> node_times() const noexcept { return times_; }
    std::span<const double> rates() const noexcept { return rates_; }

    /// Rate in force at t (right-continuous at nodes; t = horizon takes the
    /// last segment).
    double rate_at(double t) const;

    /// Exact integral of the rate over [t, s].
    double integral(double t, double s) const;

private:
    std::size_t segment_of(double t) const;
    void check_interval(double t, double s) const;

    std::vector<double> times_;
    std::vector<double> rates_;
    // cumulative integral from 0 to times_[i]
    std::vector<double> cumulative_;
    CurveKind kind_;
};

double discount_factor(const TermStructure& curve, double t, double s);
double survival_probability(const TermStructure& curve, double t, double s);
double default_probability(const TermStructure& curve, double t, double s);

struct CdsQuoteStrip {
    std::vector<double> maturities;
    std::vector<double> spreads;
    double recovery = 0.4;

    void validate() const;
};

/// Par spread of a CDS with continuously paid premium and protection paying
/// (1 - recovery) on default, both legs running over [0, maturity].
double cds_par_spread(const TermStructure& hazard, const TermStructure& discount,
                      double recovery, double maturity);

/// Piecewise-constant hazard curve with nodes at the quote maturities that
/// reprices every quote at par. Segments are solved left to right.
TermStructure bootstrap_hazards(const CdsQuoteStrip& quotes, const TermStructure& discount);

} // namespace cva
