#pragma once

// Exact sampling of fractional Brownian motion on a uniform grid.
//
// Increments of B_H over a step dt form a stationary Gaussian sequence
// (fractional Gaussian noise) with autocovariance
//     gamma(k) = dt^(2H) * (|k+1|^(2H) + |k-1|^(2H) - 2|k|^(2H)) / 2.
// Two exact samplers are provided:
//   Cholesky  dense factorization of the n x n Toeplitz covariance, O(n^3)
//             once per grid plus O(n^2) per path; capped at `max_dense` steps
//             (default 8192, about 0.5 GB of factor).
//   Hosking   Durbin-Levinson recursion on the conditional distribution of
//             each increment given the past, O(n^2) per path and O(n) memory;
//             used for long single series.

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "tfbs/errors.hpp"

namespace tfbs {

inline constexpr std::size_t kDefaultDenseCap = 8192;

struct FbmGrid {
    std::size_t n_steps = 1;
    double dt = 1.0;
    double hurst = 0.5;

    void validate() const {
        detail::require(n_steps >= 1, "grid needs at least one step");
        detail::require(std::isfinite(dt) && dt > 0.0, "grid step must be positive and finite");
        detail::require(std::isfinite(hurst) && hurst >= 0.5 && hurst < 1.0, "hurst must lie in [0.5, 1)");
    }
};

struct FbmPath {
    double hurst = 0.5;
    std::vector<double> times;   // 0, dt, ..., n dt
    std::vector<double> values;  // B_H at each time, values[0] = 0
};

/// Spot path S_t = S0 exp(drift * (t - t0) + sigma * B_H(t - t0)) on absolute times.
struct SpotPath {
    double s0 = 0.0;
    double rate_domestic = 0.0;
    double rate_foreign = 0.0;
    double sigma = 0.0;
    double hurst = 0.5;
    std::vector<double> times;
    std::vector<double> bh;
    std::vector<double> spots;
};

enum class FbmMethod { Cholesky, Hosking };

/// Autocovariance of fractional Gaussian noise at integer lag k.
inline double fgn_autocovariance(std::size_t k, double hurst, double dt) {
    const double two_h = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    const double lower = k == 0 ? 1.0 : std::pow(kk - 1.0, two_h);
    const double value =
        0.5 * (std::pow(kk + 1.0, two_h) + lower - 2.0 * std::pow(kk, two_h));
    return std::pow(dt, two_h) * value;
}

inline Eigen::MatrixXd fgn_covariance(const FbmGrid& grid, std::size_t max_dense = kDefaultDenseCap) {
    grid.validate();
    if (grid.n_steps > max_dense) {
        throw ResourceLimit("grid of " + std::to_string(grid.n_steps) +
                            " steps exceeds the dense covariance cap of " + std::to_string(max_dense));
    }
    const auto n = static_cast<Eigen::Index>(grid.n_steps);
    std::vector<double> gamma(grid.n_steps);
    for (std::size_t k = 0; k < grid.n_steps; ++k) gamma[k] = fgn_autocovariance(k, grid.hurst, grid.dt);
    Eigen::MatrixXd cov(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) cov(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
    return cov;
}

class FbmSampler {
public:
    explicit FbmSampler(const FbmGrid& grid, FbmMethod method = FbmMethod::Cholesky,
                        std::size_t max_dense = kDefaultDenseCap)
        : grid_(grid), method_(method) {
        grid_.validate();
        if (method_ == FbmMethod::Cholesky) {
            Eigen::LLT<Eigen::MatrixXd> llt(fgn_covariance(grid_, max_dense));
            if (llt.info() != Eigen::Success) throw InvalidArgument("fGn covariance factorization failed");
            factor_ = llt.matrixL();
        } else {
            autocorrelation_.resize(grid_.n_steps);
            for (std::size_t k = 0; k < grid_.n_steps; ++k)
                autocorrelation_[k] = fgn_autocovariance(k, grid_.hurst, 1.0);
        }
    }

    const FbmGrid& grid() const noexcept { return grid_; }
    FbmMethod method() const noexcept { return method_; }

    /// fGn increments B_H((i+1)dt) - B_H(i dt), i = 0..n-1. Deterministic in seed.
    std::vector<double> increments(std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        std::vector<double> z(grid_.n_steps);
        for (double& v : z) v = normal(rng);
        return method_ == FbmMethod::Cholesky ? cholesky_increments(z) : hosking_increments(z);
    }

    FbmPath sample(std::uint64_t seed) const {
        const std::vector<double> inc = increments(seed);
        FbmPath path;
        path.hurst = grid_.hurst;
        path.times.resize(inc.size() + 1);
        path.values.resize(inc.size() + 1);
        path.times[0] = 0.0;
        path.values[0] = 0.0;
        for (std::size_t i = 0; i < inc.size(); ++i) {
            path.times[i + 1] = static_cast<double>(i + 1) * grid_.dt;
            path.values[i + 1] = path.values[i] + inc[i];
        }
        return path;
    }

private:
    std::vector<double> cholesky_increments(const std::vector<double>& z) const {
        const Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(z.size()));
        const Eigen::VectorXd x = factor_.triangularView<Eigen::Lower>() * zv;
        return {x.data(), x.data() + x.size()};
    }

    // Durbin-Levinson: X_n | X_0..X_{n-1} ~ N(sum_j phi_{n,j} X_{n-j}, v_n) for
    // unit-step fGn; scaled by dt^H at the end.
    std::vector<double> hosking_increments(const std::vector<double>& z) const {
        const std::size_t n = z.size();
        const std::vector<double>& r = autocorrelation_;
        const double scale = std::pow(grid_.dt, grid_.hurst);
        if (std::all_of(r.begin() + 1, r.end(), [](double c) { return c == 0.0; })) {
            // Uncorrelated increments (H = 1/2): every reflection coefficient is zero.
            std::vector<double> x(z);
            for (double& value : x) value *= scale;
            return x;
        }
        std::vector<double> x(n);
        std::vector<double> phi(n, 0.0);
        std::vector<double> prev(n, 0.0);
        double v = r[0];
        x[0] = std::sqrt(v) * z[0];
        for (std::size_t k = 1; k < n; ++k) {
            double acc = r[k];
            for (std::size_t j = 1; j < k; ++j) acc -= prev[j] * r[k - j];
            const double reflection = acc / v;
            phi[k] = reflection;
            for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - reflection * prev[k - j];
            v *= 1.0 - reflection * reflection;
            if (!(v > 0.0)) throw InvalidArgument("fGn recursion lost positive definiteness");
            double mean = 0.0;
            for (std::size_t j = 1; j <= k; ++j) mean += phi[j] * x[k - j];
            x[k] = mean + std::sqrt(v) * z[k];
            std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k + 1), prev.begin());
        }
        for (double& value : x) value *= scale;
        return x;
    }

    FbmGrid grid_;
    FbmMethod method_;
    Eigen::MatrixXd factor_;
    std::vector<double> autocorrelation_;
};

inline FbmPath sample_fbm(const FbmGrid& grid, std::uint64_t seed, FbmMethod method = FbmMethod::Cholesky) {
    return FbmSampler(grid, method).sample(seed);
}

/// Risk-neutral spot path: S = S0 exp((r_d - r_f) u + sigma B_H(u)), u = t - start_time.
inline SpotPath sample_spot_path(const FbmPath& fbm, double s0, double rate_domestic, double rate_foreign,
                                 double sigma, double start_time = 0.0) {
    detail::require(std::isfinite(s0) && s0 > 0.0, "initial spot must be positive and finite");
    detail::require(std::isfinite(sigma) && sigma >= 0.0, "sigma must be non-negative and finite");
    detail::require(std::isfinite(rate_domestic) && std::isfinite(rate_foreign), "rates must be finite");
    detail::require(!fbm.values.empty() && fbm.values.size() == fbm.times.size(), "malformed fBm path");
    SpotPath path{s0, rate_domestic, rate_foreign, sigma, fbm.hurst, {}, fbm.values, {}};
    const double drift = rate_domestic - rate_foreign;
    path.times.reserve(fbm.times.size());
    path.spots.reserve(fbm.times.size());
    for (std::size_t i = 0; i < fbm.times.size(); ++i) {
        path.times.push_back(start_time + fbm.times[i]);
        path.spots.push_back(s0 * std::exp(drift * fbm.times[i] + sigma * fbm.values[i]));
    }
    return path;
}

/// Physical-measure path S = S0 exp(mu u + sigma B_H(u)); rates are recorded as zero.
inline SpotPath sample_physical_spot_path(const FbmPath& fbm, double s0, double drift, double sigma,
                                          double start_time = 0.0) {
    detail::require(std::isfinite(drift), "drift must be finite");
    SpotPath path = sample_spot_path(fbm, s0, 0.0, 0.0, sigma, start_time);
    for (std::size_t i = 0; i < path.spots.size(); ++i) path.spots[i] *= std::exp(drift * fbm.times[i]);
    return path;
}

inline void write_path_csv(std::ostream& os, const SpotPath& path) {
    const auto old_precision = os.precision(10);
    os << "t,bh,spot\n";
    for (std::size_t i = 0; i < path.times.size(); ++i)
        os << path.times[i] << ',' << path.bh[i] << ',' << path.spots[i] << '\n';
    os.precision(old_precision);
}

}  // namespace tfbs
