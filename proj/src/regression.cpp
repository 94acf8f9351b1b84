#include "cva/regression.hpp"

#include "cva/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cva {

namespace {

constexpr double ridge_lambda = 1e-8;

// Appends every monomial of exact total degree `remaining` whose factor
// indices are non-decreasing from `first`.
void add_monomials(const Eigen::MatrixXd& z, Eigen::Index first, int remaining, const Eigen::VectorXd& partial,
                   std::vector<Eigen::VectorXd>& columns) {
    if (remaining == 0) {
        columns.push_back(partial);
        return;
    }
    for (Eigen::Index c = first; c < z.cols(); ++c)
        add_monomials(z, c, remaining - 1, partial.cwiseProduct(z.col(c)), columns);
}

} // namespace

RegressionFit conditional_expectation(const Eigen::VectorXd& values, const Eigen::MatrixXd& state, int degree) {
    const Eigen::Index n = values.size();
    if (degree < 0)
        throw InputError("regression: degree must be non-negative");
    if (state.rows() != n)
        throw InputError("regression: state and regressand sizes differ");
    if (n == 0)
        throw InputError("regression: no paths");

    std::vector<Eigen::VectorXd> kept;
    for (Eigen::Index c = 0; c < state.cols(); ++c) {
        const double mean = state.col(c).mean();
        const Eigen::VectorXd centred = state.col(c).array() - mean;
        const double sd = std::sqrt(centred.squaredNorm() / static_cast<double>(n));
        if (sd > 1e-12 * std::max(1.0, std::abs(mean)))
            kept.push_back(centred / sd);
    }
    Eigen::MatrixXd z(n, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c)
        z.col(static_cast<Eigen::Index>(c)) = kept[c];

    std::vector<Eigen::VectorXd> columns;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    for (int d = 0; d <= (z.cols() == 0 ? 0 : degree); ++d)
        add_monomials(z, 0, d, ones, columns);

    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c)
        design.col(static_cast<Eigen::Index>(c)) = columns[c];

    RegressionFit fit;
    fit.basis_size = design.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    Eigen::VectorXd beta;
    if (qr.rank() == design.cols()) {
        beta = qr.solve(values);
    } else {
        fit.ridge_fallback = true;
        Eigen::MatrixXd normal = design.transpose() * design;
        normal.diagonal().array() += ridge_lambda;
        beta = normal.ldlt().solve(design.transpose() * values);
    }
    fit.fitted = design * beta;
    if (!fit.fitted.allFinite())
        throw NumericalError("regression: non-finite fitted values");
    return fit;
}

std::vector<std::size_t> resolve_state_factors(const ScenarioCube& cube, const RegressionSpec& spec,
                                               const std::vector<std::string>& traded) {
    std::vector<std::size_t> out;
    auto add = [&out](std::size_t f) {
        if (std::find(out.begin(), out.end(), f) == out.end())
            out.push_back(f);
    };
    if (!spec.factors.empty()) {
        for (const auto& name : spec.factors)
            add(cube.require_name(name));
        return out;
    }
    if (auto r = cube.find_role(FactorRole::rate))
        add(*r);
    for (const auto& name : traded)
        add(cube.require_name(name));
    return out;
}

Eigen::MatrixXd state_at_node(const ScenarioCube& cube, std::span<const std::size_t> factors, std::size_t node) {
    Eigen::MatrixXd state(static_cast<Eigen::Index>(cube.paths()), static_cast<Eigen::Index>(factors.size()));
    for (std::size_t p = 0; p < cube.paths(); ++p)
        for (std::size_t c = 0; c < factors.size(); ++c)
            state(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(c)) = cube.value(p, node, factors[c]);
    return state;
}

} // namespace cva
