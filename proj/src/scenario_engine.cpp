#include "cva/scenario_engine.hpp"

#include "cva/errors.hpp"
#include "cva/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

namespace cva {

namespace {

constexpr double merge_tolerance = 1e-9;

const char* kind_name(ProcessKind kind) {
    switch (kind) {
    case ProcessKind::cir:
        return "cir";
    case ProcessKind::gbm:
        return "gbm";
    case ProcessKind::bk:
        return "bk";
    }
    return "?";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

void ProcessSpec::validate() const {
    const std::string where = "scenario_engine: process '" + name + "' (" + kind_name(kind) + "): ";
    if (name.empty())
        throw InputError("scenario_engine: process without a name");
    if (!(vol >= 0.0))
        throw InputError(where + "volatility must be non-negative");
    if (!std::isfinite(speed) || !std::isfinite(level) || !std::isfinite(initial) || !std::isfinite(drift))
        throw InputError(where + "non-finite parameter");
    switch (kind) {
    case ProcessKind::cir:
        if (!(level >= 0.0) || !(initial >= 0.0) || !(speed >= 0.0))
            throw InputError(where + "requires speed, level and initial value >= 0");
        break;
    case ProcessKind::gbm:
        if (!(initial > 0.0))
            throw InputError(where + "requires a positive initial value");
        break;
    case ProcessKind::bk:
        if (!(initial > 0.0) || !(level > 0.0) || !(speed >= 0.0))
            throw InputError(where + "requires positive initial value and level, speed >= 0");
        break;
    }
}

double step_process(const ProcessSpec& spec, double state, double dt, double z) {
    const double sqrt_dt = std::sqrt(dt);
    switch (spec.kind) {
    case ProcessKind::cir: {
        const double pos = std::max(state, 0.0);
        const double pull = -std::expm1(-spec.speed * dt); // 1 - e^{-speed dt}
        return state + (spec.level - pos) * pull + spec.vol * std::sqrt(pos) * sqrt_dt * z;
    }
    case ProcessKind::gbm:
        return state * std::exp((spec.drift - 0.5 * spec.vol * spec.vol) * dt + spec.vol * sqrt_dt * z);
    case ProcessKind::bk: {
        const double log_level = std::log(spec.level);
        const double y = log_level + (std::log(state) - log_level) * std::exp(-spec.speed * dt) +
                         spec.vol * sqrt_dt * z;
        return std::exp(y);
    }
    }
    return state;
}

double observed_value(const ProcessSpec& spec, double state) {
    return spec.kind == ProcessKind::cir ? std::max(state, 0.0) : state;
}

FellerResult feller_check(const ProcessSpec& spec) {
    if (spec.kind != ProcessKind::cir)
        throw InputError("scenario_engine: Feller condition applies to CIR processes only");
    FellerResult res;
    res.lhs = 2.0 * spec.speed * spec.level;
    res.rhs = spec.vol * spec.vol;
    res.satisfied = res.lhs >= res.rhs;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: 2*speed*level = %.6g %s vol^2 = %.6g", spec.name.c_str(), res.lhs,
                  res.satisfied ? ">=" : "<", res.rhs);
    res.diagnostic = buf;
    return res;
}

CorrelationSpec::CorrelationSpec(std::vector<std::string> factors, Eigen::MatrixXd matrix)
    : factors_(std::move(factors)), matrix_(std::move(matrix)) {
    validate();
}

CorrelationSpec CorrelationSpec::identity(std::vector<std::string> factors) {
    const auto n = static_cast<Eigen::Index>(factors.size());
    return CorrelationSpec(std::move(factors), Eigen::MatrixXd::Identity(n, n));
}

void CorrelationSpec::validate() const {
    const auto n = static_cast<Eigen::Index>(factors_.size());
    if (matrix_.rows() != n || matrix_.cols() != n)
        throw InputError("scenario_engine: correlation matrix size does not match factor list");
    std::set<std::string> seen(factors_.begin(), factors_.end());
    if (seen.size() != factors_.size())
        throw InputError("scenario_engine: duplicate factor in correlation spec");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(matrix_(i, i) - 1.0) > 1e-12)
            throw InputError("scenario_engine: correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(matrix_(i, j) - matrix_(j, i)) > 1e-12)
                throw InputError("scenario_engine: correlation matrix not symmetric");
            if (std::abs(matrix_(i, j)) > 1.0)
                throw InputError("scenario_engine: correlation entry outside [-1,1]");
        }
    }
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(matrix_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10)
            throw InputError("scenario_engine: correlation matrix is not positive semi-definite");
    }
}

double CorrelationSpec::get(const std::string& a, const std::string& b) const {
    auto ia = std::find(factors_.begin(), factors_.end(), a);
    auto ib = std::find(factors_.begin(), factors_.end(), b);
    if (ia == factors_.end() || ib == factors_.end())
        return a == b ? 1.0 : 0.0;
    return matrix_(ia - factors_.begin(), ib - factors_.begin());
}

CorrelationSpec CorrelationSpec::with(const std::string& a, const std::string& b, double rho) const {
    std::vector<std::string> names = factors_;
    for (const auto& n : {a, b})
        if (std::find(names.begin(), names.end(), n) == names.end())
            names.push_back(n);
    Eigen::MatrixXd m = ordered(names);
    auto ia = std::find(names.begin(), names.end(), a) - names.begin();
    auto ib = std::find(names.begin(), names.end(), b) - names.begin();
    m(ia, ib) = rho;
    m(ib, ia) = rho;
    return CorrelationSpec(std::move(names), std::move(m));
}

Eigen::MatrixXd CorrelationSpec::ordered(const std::vector<std::string>& order) const {
    const auto n = static_cast<Eigen::Index>(order.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j)
                m(i, j) = get(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    return m;
}

namespace {
// Cholesky tolerant of semi-definite input: a vanishing pivot zeroes the
// column instead of failing.
Eigen::MatrixXd semidefinite_cholesky(const Eigen::MatrixXd& a) {
    const Eigen::Index n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k)
            diag -= l(j, k) * l(j, k);
        if (diag <= 1e-12)
            continue;
        l(j, j) = std::sqrt(diag);
        for (Eigen::Index i = j + 1; i < n; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k)
                s -= l(i, k) * l(j, k);
            l(i, j) = s / l(j, j);
        }
    }
    return l;
}
} // namespace

Eigen::MatrixXd CorrelationSpec::lower_root() const { return semidefinite_cholesky(matrix_); }

TimeBucketGrid::TimeBucketGrid(std::vector<double> bucket_times, double margin_period)
    : buckets_(std::move(bucket_times)), margin_period_(margin_period) {
    if (buckets_.size() < 2)
        throw InputError("scenario_engine: need at least two time buckets");
    if (buckets_.front() != 0.0)
        throw InputError("scenario_engine: first time bucket must be 0");
    for (std::size_t i = 1; i < buckets_.size(); ++i)
        if (!(buckets_[i] > buckets_[i - 1]))
            throw InputError("scenario_engine: time buckets must be strictly increasing");
    if (!(margin_period_ >= 0.0))
        throw InputError("scenario_engine: margin period must be non-negative");

    std::vector<double> candidates = buckets_;
    for (double t : buckets_)
        candidates.push_back(std::max(0.0, t - margin_period_));
    std::sort(candidates.begin(), candidates.end());
    for (double t : candidates) {
        if (sim_times_.empty() || t - sim_times_.back() > merge_tolerance)
            sim_times_.push_back(t);
    }
    // prefer exact bucket times for merged nodes
    auto nearest = [this](double t) {
        auto it = std::lower_bound(sim_times_.begin(), sim_times_.end(), t - merge_tolerance);
        return static_cast<std::size_t>(it - sim_times_.begin());
    };
    for (double t : buckets_) {
        std::size_t idx = nearest(t);
        sim_times_[idx] = t;
        bucket_nodes_.push_back(idx);
    }
    for (double t : buckets_)
        shadow_nodes_.push_back(nearest(std::max(0.0, t - margin_period_)));
}

TimeBucketGrid TimeBucketGrid::regular(double step, double horizon, double margin_period) {
    if (!(step > 0.0) || !(horizon > 0.0))
        throw InputError("scenario_engine: bucket step and horizon must be positive");
    std::vector<double> times{0.0};
    for (long k = 1;; ++k) {
        double t = static_cast<double>(k) * step;
        if (t >= horizon - merge_tolerance)
            break;
        times.push_back(t);
    }
    times.push_back(horizon);
    return TimeBucketGrid(std::move(times), margin_period);
}

std::size_t TimeBucketGrid::bucket_containing(double t) const {
    if (t < buckets_.front() - merge_tolerance)
        throw InputError("scenario_engine: time before the first bucket");
    if (t > horizon() + merge_tolerance)
        throw HorizonError(t, horizon());
    auto it = std::upper_bound(buckets_.begin(), buckets_.end(), t + merge_tolerance);
    auto idx = static_cast<std::size_t>(it - buckets_.begin());
    return std::min(idx - 1, buckets_.size() - 1);
}

ScenarioCube::ScenarioCube(std::vector<ProcessSpec> specs, TimeBucketGrid grid, std::size_t paths,
                           std::uint64_t seed)
    : specs_(std::move(specs)), grid_(std::move(grid)), paths_(paths), seed_(seed) {
    data_.assign(paths_ * nodes() * factors(), 0.0);
}

std::span<const double> ScenarioCube::path_slice(std::size_t path) const {
    const std::size_t width = nodes() * factors();
    return std::span<const double>(data_).subspan(path * width, width);
}

std::optional<std::size_t> ScenarioCube::find_role(FactorRole role) const {
    for (std::size_t f = 0; f < specs_.size(); ++f)
        if (specs_[f].role == role)
            return f;
    return std::nullopt;
}

std::optional<std::size_t> ScenarioCube::find_name(const std::string& name) const {
    for (std::size_t f = 0; f < specs_.size(); ++f)
        if (specs_[f].name == name)
            return f;
    return std::nullopt;
}

std::size_t ScenarioCube::require_name(const std::string& name) const {
    auto f = find_name(name);
    if (!f)
        throw InputError("scenario_engine: unknown factor '" + name + "'");
    return *f;
}

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t path) {
    return splitmix64(splitmix64(seed) ^ splitmix64(path + 0x632be59bd9b4e019ULL));
}

ScenarioCube simulate(const std::vector<ProcessSpec>& specs, const CorrelationSpec& corr, const TimeBucketGrid& grid,
                      std::size_t paths, std::uint64_t seed, std::size_t workers) {
    if (paths == 0)
        throw InputError("scenario_engine: path count must be at least 1");
    if (specs.empty())
        throw InputError("scenario_engine: no processes to simulate");
    std::vector<std::string> names;
    for (const auto& s : specs) {
        s.validate();
        names.push_back(s.name);
    }
    for (const auto& n : corr.factors())
        if (std::find(names.begin(), names.end(), n) == names.end())
            throw InputError("scenario_engine: correlation refers to unknown factor '" + n + "'");
    std::set<std::string> unique_names(names.begin(), names.end());
    if (unique_names.size() != names.size())
        throw InputError("scenario_engine: duplicate process name");

    const Eigen::MatrixXd root = CorrelationSpec(names, corr.ordered(names)).lower_root();
    ScenarioCube cube(specs, grid, paths, seed);
    const auto times = grid.simulation_times();
    const std::size_t n_factors = specs.size();

    parallel_for(paths, workers, [&](std::size_t begin, std::size_t end) {
        std::vector<double> state(n_factors);
        Eigen::VectorXd eps(static_cast<Eigen::Index>(n_factors));
        for (std::size_t p = begin; p < end; ++p) {
            std::mt19937_64 gen(path_seed(seed, p));
            std::normal_distribution<double> normal(0.0, 1.0);
            for (std::size_t f = 0; f < n_factors; ++f) {
                state[f] = specs[f].initial;
                cube.value(p, 0, f) = observed_value(specs[f], state[f]);
            }
            for (std::size_t n = 0; n + 1 < times.size(); ++n) {
                const double dt = times[n + 1] - times[n];
                for (std::size_t f = 0; f < n_factors; ++f)
                    eps[static_cast<Eigen::Index>(f)] = normal(gen);
                const Eigen::VectorXd z = root * eps;
                for (std::size_t f = 0; f < n_factors; ++f) {
                    state[f] = step_process(specs[f], state[f], dt, z[static_cast<Eigen::Index>(f)]);
                    cube.value(p, n + 1, f) = observed_value(specs[f], state[f]);
                }
            }
        }
    });
    return cube;
}

std::vector<double> interpolate_curve_between_buckets(const ScenarioCube& cube, std::size_t path, double t) {
    const auto times = cube.grid().simulation_times();
    if (path >= cube.paths())
        throw InputError("scenario_engine: path index out of range");
    if (t < times.front() - merge_tolerance || t > times.back() + merge_tolerance)
        throw HorizonError(t, times.back());
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t hi = std::min(static_cast<std::size_t>(it - times.begin()), times.size() - 1);
    std::size_t lo = hi == 0 ? 0 : hi - 1;
    std::vector<double> out(cube.factors());
    if (lo == hi || t <= times[lo]) {
        for (std::size_t f = 0; f < out.size(); ++f)
            out[f] = cube.value(path, lo, f);
        return out;
    }
    const double w = std::clamp((t - times[lo]) / (times[hi] - times[lo]), 0.0, 1.0);
    for (std::size_t f = 0; f < out.size(); ++f)
        out[f] = (1.0 - w) * cube.value(path, lo, f) + w * cube.value(path, hi, f);
    return out;
}

double model_discount(const ProcessSpec& rate_spec, double r, double tau) {
    if (tau < 0.0)
        throw InputError("scenario_engine: negative bond maturity");
    if (tau == 0.0)
        return 1.0;
    if (rate_spec.kind != ProcessKind::cir)
        return std::exp(-r * tau);
    const double kappa = rate_spec.speed;
    const double theta = rate_spec.level;
    const double sigma = rate_spec.vol;
    if (sigma < 1e-6) {
        // deterministic limit: r(u) relaxes to theta at speed kappa
        const double b = kappa > 0.0 ? -std::expm1(-kappa * tau) / kappa : tau;
        return std::exp(-theta * (tau - b) - b * r);
    }
    const double gamma = std::sqrt(kappa * kappa + 2.0 * sigma * sigma);
    const double growth = std::expm1(gamma * tau);
    const double denom = (gamma + kappa) * growth + 2.0 * gamma;
    const double b = 2.0 * growth / denom;
    const double log_a =
        (2.0 * kappa * theta / (sigma * sigma)) * (std::log(2.0 * gamma / denom) + 0.5 * (kappa + gamma) * tau);
    return std::exp(log_a - b * r);
}

void write_cube(const ScenarioCube& cube, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("scenario_engine: cannot open " + path);
    auto put_u64 = [&out](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); };
    out.write("CVACUBE1", 8);
    put_u64(cube.paths());
    put_u64(cube.nodes());
    put_u64(cube.factors());
    put_u64(cube.seed());
    for (double t : cube.grid().simulation_times())
        out.write(reinterpret_cast<const char*>(&t), sizeof t);
    for (const auto& s : cube.specs()) {
        put_u64(s.name.size());
        out.write(s.name.data(), static_cast<std::streamsize>(s.name.size()));
    }
    out.write(reinterpret_cast<const char*>(cube.raw().data()),
              static_cast<std::streamsize>(cube.raw().size() * sizeof(double)));
    if (!out)
        throw std::runtime_error("scenario_engine: write failed for " + path);
}

} // namespace cva
