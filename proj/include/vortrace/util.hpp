#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace vortrace {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.1415926535897932384626433832795;
// Laplacian eigenvalue factor for e_k = exp(2*pi*i k.x): lambda_k = 4*pi^2 |k|^2.
inline constexpr double kFourPiSq = 39.478417604357434475337963999505;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    Vec2 operator-() const { return {-x, -y}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::sqrt(x * x + y * y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Symmetric 2x2 matrix used for covariance estimates.
struct Mat2 {
    // row-major: [a b; c d]
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;

    static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Mat2 zero() { return {}; }

    double operator()(int i, int j) const {
        return i == 0 ? (j == 0 ? a : b) : (j == 0 ? c : d);
    }
    double& at(int i, int j) {
        if (i == 0) return j == 0 ? a : b;
        return j == 0 ? c : d;
    }
    Mat2 operator+(const Mat2& o) const { return {a + o.a, b + o.b, c + o.c, d + o.d}; }
    Mat2 operator-(const Mat2& o) const { return {a - o.a, b - o.b, c - o.c, d - o.d}; }
    Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
    Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
    Mat2 mul(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    double trace() const { return a + d; }
    Mat2 sym() const { return {a, 0.5 * (b + c), 0.5 * (b + c), d}; }
    double max_abs() const {
        return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
    }
};

/// Eigen-decomposition of a symmetric 2x2 matrix; returns {l1, l2} and fills
/// the (orthonormal) eigenvectors, l1 >= l2.
inline std::array<double, 2> sym_eigen(const Mat2& m, Vec2& v1, Vec2& v2) {
    const double tr = m.a + m.d;
    const double det = m.a * m.d - m.b * m.c;
    const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
    const double l1 = 0.5 * tr + disc;
    const double l2 = 0.5 * tr - disc;
    if (std::abs(m.b) > 1e-300) {
        v1 = {m.b, l1 - m.a};
        v2 = {m.b, l2 - m.a};
    } else {
        // already diagonal
        if (m.a >= m.d) {
            v1 = {1.0, 0.0};
            v2 = {0.0, 1.0};
        } else {
            v1 = {0.0, 1.0};
            v2 = {1.0, 0.0};
        }
    }
    const double n1 = v1.norm(), n2 = v2.norm();
    if (n1 > 0) v1 = v1 / n1;
    if (n2 > 0) v2 = v2 / n2;
    return {l1, l2};
}

/// Inverse symmetric square root with an eigenvalue floor, for whitening.
/// Returns false (and flags) when an eigenvalue sits at the floor.
inline bool inv_sym_sqrt(const Mat2& m, double eig_floor, Mat2& out) {
    Vec2 v1, v2;
    auto l = sym_eigen(m.sym(), v1, v2);
    bool ok = true;
    for (auto& li : l) {
        if (li < eig_floor) {
            li = eig_floor;
            ok = false;
        }
    }
    const double s1 = 1.0 / std::sqrt(l[0]);
    const double s2 = 1.0 / std::sqrt(l[1]);
    out = Mat2{s1 * v1.x * v1.x + s2 * v2.x * v2.x, s1 * v1.x * v1.y + s2 * v2.x * v2.y,
               s1 * v1.x * v1.y + s2 * v2.x * v2.y, s1 * v1.y * v1.y + s2 * v2.y * v2.y};
    return ok;
}

/// Runs fn(i) for i in [0, n). Results must be written to per-index slots so
/// the outcome does not depend on scheduling. nthreads <= 1 runs inline.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned nthreads) {
    if (n == 0) return;
    if (nthreads <= 1 || n == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    nthreads = static_cast<unsigned>(std::min<std::size_t>(nthreads, n));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::atomic<std::size_t> next{0};
    for (unsigned t = 0; t < nthreads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

inline unsigned default_thread_count() {
    if (const char* env = std::getenv("VORTRACE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// 17 significant digits: doubles round-trip exactly through this format.
inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace vortrace
