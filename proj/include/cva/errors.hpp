#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cva {

/// Violated precondition on caller-supplied input (bad curve nodes, reversed
/// interval, malformed schedule). Maps to a configuration error in the CLI.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Evaluation requested beyond the last node of a term structure or grid.
class HorizonError : public InputError {
public:
    HorizonError(double requested, double horizon);
    double requested() const noexcept { return requested_; }
    double horizon() const noexcept { return horizon_; }

private:
    double requested_;
    double horizon_;
};

/// A model computation could not be completed with the given inputs.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Correlation outside the range for which every bivariate Bernoulli cell is
/// a probability.
class InfeasibleCorrelation : public NumericalError {
public:
    InfeasibleCorrelation(double rho, std::string cell, double value);
    const std::string& cell() const noexcept { return cell_; }

private:
    std::string cell_;
};

/// Hazard bootstrap failure, reported with the offending quote index.
class BootstrapError : public NumericalError {
public:
    BootstrapError(std::size_t segment, const std::string& what);
    std::size_t segment() const noexcept { return segment_; }

private:
    std::size_t segment_;
};

} // namespace cva
