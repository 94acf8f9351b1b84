#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cva {

enum class ProcessKind { cir, gbm, bk };
enum class FactorRole { rate, hazard_a, hazard_b, equity, fx, collateral };

/// One simulated risk factor.
///
/// - cir: dx = speed (level - x) dt + vol sqrt(x) dW, full truncation.
/// - gbm: dS/S = drift dt + vol dW.
/// - bk:  d ln x = speed (ln level - ln x) dt + vol dW.
///
/// Mean-reverting drifts are integrated exactly over each step; the
/// diffusion term is an Euler increment.
struct ProcessSpec {
    std::string name;
    ProcessKind kind = ProcessKind::gbm;
    FactorRole role = FactorRole::equity;
    double speed = 0.0;
    double level = 0.0;
    double vol = 0.0;
    double initial = 0.0;
    double drift = 0.0;

    void validate() const;
};

/// Advances one factor by dt using the standard normal draw z. For CIR the
/// returned state may be negative (full truncation keeps it); observe it
/// through observed_value().
double step_process(const ProcessSpec& spec, double state, double dt, double z);
double observed_value(const ProcessSpec& spec, double state);

struct FellerResult {
    bool satisfied = true;
    double lhs = 0.0; // 2 * speed * level
    double rhs = 0.0; // vol^2
    std::string diagnostic;
};

FellerResult feller_check(const ProcessSpec& spec);

/// Correlation of the Brownian drivers, in the order of `factors`.
class CorrelationSpec {
public:
    CorrelationSpec() = default;
    CorrelationSpec(std::vector<std::string> factors, Eigen::MatrixXd matrix);

    static CorrelationSpec identity(std::vector<std::string> factors);

    const std::vector<std::string>& factors() const noexcept { return factors_; }
    const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
    double get(const std::string& a, const std::string& b) const;
    /// Copy with one symmetric pair changed; re-validated.
    CorrelationSpec with(const std::string& a, const std::string& b, double rho) const;
    /// Lower-triangular L with L L^T = matrix; zero columns where the matrix
    /// is singular.
    Eigen::MatrixXd lower_root() const;
    /// Re-expresses the matrix over `order`; unlisted factors are independent.
    Eigen::MatrixXd ordered(const std::vector<std::string>& order) const;

private:
    void validate() const;
    std::vector<std::string> factors_;
    Eigen::MatrixXd matrix_;
};

/// Valuation buckets, plus optional collateral nodes T_k - margin_period.
class TimeBucketGrid {
public:
    TimeBucketGrid() = default;
    explicit TimeBucketGrid(std::vector<double> bucket_times, double margin_period = 0.0);

    static TimeBucketGrid regular(double step, double horizon, double margin_period = 0.0);

    std::span<const double> bucket_times() const noexcept { return buckets_; }
    std::size_t bucket_count() const noexcept { return buckets_.size(); }
    double margin_period() const noexcept { return margin_period_; }
    double horizon() const { return buckets_.back(); }

    /// Sorted union of bucket and collateral nodes.
    std::span<const double> simulation_times() const noexcept { return sim_times_; }
    std::size_t bucket_node(std::size_t k) const { return bucket_nodes_[k]; }
    /// Node of T_k - margin_period, clamped at 0.
    std::size_t shadow_node(std::size_t k) const { return shadow_nodes_[k]; }
    /// Bucket k with T_k <= t < T_{k+1} (last bucket for t = horizon).
    std::size_t bucket_containing(double t) const;

private:
    std::vector<double> buckets_;
    double margin_period_ = 0.0;
    std::vector<double> sim_times_;
    std::vector<std::size_t> bucket_nodes_;
    std::vector<std::size_t> shadow_nodes_;
};

/// Simulated factor values, path-major: value(path, node, factor).
class ScenarioCube {
public:
    ScenarioCube(std::vector<ProcessSpec> specs, TimeBucketGrid grid, std::size_t paths, std::uint64_t seed);

    std::size_t paths() const noexcept { return paths_; }
    std::size_t nodes() const noexcept { return grid_.simulation_times().size(); }
    std::size_t factors() const noexcept { return specs_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const TimeBucketGrid& grid() const noexcept { return grid_; }
    const std::vector<ProcessSpec>& specs() const noexcept { return specs_; }

    double value(std::size_t path, std::size_t node, std::size_t factor) const {
        return data_[(path * nodes() + node) * factors() + factor];
    }
    double& value(std::size_t path, std::size_t node, std::size_t factor) {
        return data_[(path * nodes() + node) * factors() + factor];
    }
    /// All nodes x factors of one path.
    std::span<const double> path_slice(std::size_t path) const;

    std::optional<std::size_t> find_role(FactorRole role) const;
    std::optional<std::size_t> find_name(const std::string& name) const;
    std::size_t require_name(const std::string& name) const;

    const std::vector<double>& raw() const noexcept { return data_; }

private:
    std::vector<ProcessSpec> specs_;
    TimeBucketGrid grid_;
    std::size_t paths_;
    std::uint64_t seed_;
    std::vector<double> data_;
};

/// Each path draws from its own generator seeded by (seed, path index), so
/// results do not depend on `workers` or on the total path count.
ScenarioCube simulate(const std::vector<ProcessSpec>& specs, const CorrelationSpec& corr, const TimeBucketGrid& grid,
                      std::size_t paths, std::uint64_t seed, std::size_t workers = 0);

/// Seed of the generator for one path.
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path);

/// Factor values at time t on one path, linear in time between nodes.
std::vector<double> interpolate_curve_between_buckets(const ScenarioCube& cube, std::size_t path, double t);

/// Zero-coupon bond price P(t, t + tau) implied by the rate factor at state
/// r. Affine CIR formula for CIR rate factors; flat continuation of r
/// otherwise.
double model_discount(const ProcessSpec& rate_spec, double r, double tau);

/// Debug dump: magic, counts, node times, factor names, then path-major
/// 64-bit floats.
void write_cube(const ScenarioCube& cube, const std::string& path);

} // namespace cva
