#include "cva/errors.hpp"

#include <cstdio>

namespace cva {

namespace {
std::string describe_horizon(double requested, double horizon) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "time %.10g beyond horizon %.10g", requested, horizon);
    return buf;
}

std::string describe_rho(double rho, const std::string& cell, double value) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "default_model: correlation %.10g infeasible, cell %s = %.6g",
                  rho, cell.c_str(), value);
    return buf;
}
} // namespace

HorizonError::HorizonError(double requested, double horizon)
    : InputError(describe_horizon(requested, horizon)), requested_(requested), horizon_(horizon) {}

InfeasibleCorrelation::InfeasibleCorrelation(double rho, std::string cell, double value)
    : NumericalError(describe_rho(rho, cell, value)), cell_(std::move(cell)) {}

BootstrapError::BootstrapError(std::size_t segment, const std::string& what)
    : NumericalError("term_structures: bootstrap segment " + std::to_string(segment) + ": " + what),
      segment_(segment) {}

} // namespace cva
