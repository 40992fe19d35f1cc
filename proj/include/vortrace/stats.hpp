#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vortrace/rng.hpp"
#include "vortrace/util.hpp"

namespace vortrace {

inline double mean(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty sample");
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc / static_cast<double>(xs.size());
}

inline double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw std::invalid_argument("sample_variance: need >= 2 points");
    const double m = mean(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return acc / static_cast<double>(xs.size() - 1);
}

/// Standard error of the mean by leave-one-out jackknife (equals
/// sqrt(var/n) for the mean; kept for the estimator contract).
inline double jackknife_se_mean(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("jackknife_se_mean: need >= 2 points");
    const double total = mean(xs) * static_cast<double>(n);
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) loo[i] = (total - xs[i]) / static_cast<double>(n - 1);
    const double m = mean(loo);
    double acc = 0.0;
    for (double v : loo) acc += (v - m) * (v - m);
    return std::sqrt(acc * static_cast<double>(n - 1) / static_cast<double>(n));
}

/// Lag-h sample autocorrelation.
inline double autocorrelation(const std::vector<double>& xs, std::size_t lag) {
    if (xs.size() <= lag + 1) throw std::invalid_argument("autocorrelation: series too short");
    const double m = mean(xs);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) den += (xs[i] - m) * (xs[i] - m);
    for (std::size_t i = 0; i + lag < xs.size(); ++i) num += (xs[i] - m) * (xs[i + lag] - m);
    if (den == 0.0) return 0.0;
    return num / den;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov survival function Q(x) = 2 sum_{j>=1} (-1)^{j-1} e^{-2 j^2 x^2}
/// (limit law of sqrt(n) D_n). Accurate enough for test gating.
inline double kolmogorov_q(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 0.2) return 1.0;  // Q ~ 1 far left of the support
    double acc = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        acc += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * acc, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;  // D_n
    double p_value = 1.0;    // asymptotic, with Stephens' small-n correction
    std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test against the standard normal.
inline KsResult ks_test_standard_normal(std::vector<double> xs) {
    if (xs.size() < 8) throw std::invalid_argument("ks_test: need >= 8 points");
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::abs(f - lo), std::abs(hi - f)));
    }
    KsResult r;
    r.statistic = d;
    r.n = xs.size();
    const double sn = std::sqrt(n);
    r.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
    return r;
}

/// Percentile bootstrap CI of the mean of a scalar functional over resamples.
/// Deterministic given (seed, stream).
template <typename Fn>
inline std::pair<double, double> bootstrap_ci(std::size_t n, const Fn& stat_of_resample,
                                              int resamples, double level, std::uint64_t seed,
                                              std::uint64_t stream) {
    if (n < 2) throw std::invalid_argument("bootstrap_ci: need >= 2 points");
    CounterRng rng(seed, stream);
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < resamples; ++b) {
        for (std::size_t i = 0; i < n; ++i)
            idx[i] = static_cast<std::size_t>(rng.next_uniform() * static_cast<double>(n)) % n;
        stats[static_cast<std::size_t>(b)] = stat_of_resample(idx);
    }
    std::sort(stats.begin(), stats.end());
    const double alpha = 0.5 * (1.0 - level);
    const auto pick = [&](double q) {
        const double pos = q * (static_cast<double>(stats.size()) - 1.0);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, stats.size() - 1);
        const double w = pos - static_cast<double>(lo);
        return (1.0 - w) * stats[lo] + w * stats[hi];
    };
    return {pick(alpha), pick(1.0 - alpha)};
}

/// Sample covariance (n-1 denominator) of 2-vectors.
inline Mat2 covariance(const std::vector<Vec2>& zs) {
    if (zs.size() < 2) throw std::invalid_argument("covariance: need >= 2 points");
    Vec2 m{0.0, 0.0};
    for (const auto& z : zs) m += z;
    m = m / static_cast<double>(zs.size());
    Mat2 c = Mat2::zero();
    for (const auto& z : zs) {
        const Vec2 d = z - m;
        c.a += d.x * d.x;
        c.b += d.x * d.y;
        c.d += d.y * d.y;
    }
    c.c = c.b;
    const double denom = static_cast<double>(zs.size() - 1);
    return c * (1.0 / denom);
}

/// Mardia's multivariate skewness b1 and kurtosis b2 for 2D samples
/// (standard normal reference: b1 -> 0, b2 -> 8).
inline std::pair<double, double> mardia_moments(const std::vector<Vec2>& zs) {
    const std::size_t n = zs.size();
    if (n < 4) throw std::invalid_argument("mardia_moments: need >= 4 points");
    double b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r2 = zs[i].dot(zs[i]);
        b2 += r2 * r2;
        for (std::size_t j = 0; j < n; ++j) {
            const double dij = zs[i].dot(zs[j]);
            b1 += dij * dij * dij;
        }
    }
    return {b1 / (static_cast<double>(n) * n), b2 / static_cast<double>(n)};
}

}  // namespace vortrace
