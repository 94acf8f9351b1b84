#pragma once

#include "cva/scenario_engine.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cva {

/// Polynomial basis for conditional expectations. `factors` names cube
/// factors; empty means the short rate (if simulated) plus every factor the
/// portfolio trades on.
struct RegressionSpec {
    int degree = 2;
    std::vector<std::string> factors;
};

struct RegressionFit {
    Eigen::VectorXd fitted;
    bool ridge_fallback = false;
    Eigen::Index basis_size = 0;
};

/// Least-squares fit of `values` on all monomials of the columns of `state`
/// up to `degree` (intercept included). Columns are standardised first and
/// constant columns dropped. A rank-deficient design falls back to ridge
/// with lambda = 1e-8.
RegressionFit conditional_expectation(const Eigen::VectorXd& values, const Eigen::MatrixXd& state, int degree);

/// Cube factor indices forming the regression state. `traded` lists the
/// factors the portfolio pays on; used when spec.factors is empty.
std::vector<std::size_t> resolve_state_factors(const ScenarioCube& cube, const RegressionSpec& spec,
                                               const std::vector<std::string>& traded);

/// paths x factors matrix of the selected factors at one simulation node.
Eigen::MatrixXd state_at_node(const ScenarioCube& cube, std::span<const std::size_t> factors, std::size_t node);

} // namespace cva
