#pragma once

// Test-only reference implementations, kept independent of the library's
// fast paths: direct full-lattice summation and rectangle-rule quadrature.

#include <cmath>
#include <complex>
#include <vector>

#include "vortrace/field.hpp"
#include "vortrace/rng.hpp"

namespace vortrace::testing {

/// Random real field with coefficients ~ complex normal scaled by |k|^{-decay}.
inline SpectralField random_field(int cutoff, std::uint64_t seed, double decay = 1.0,
                                  double scale = 1.0, std::uint64_t stream = 0) {
    CounterRng rng(seed, stream);
    SpectralField w(cutoff);
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const auto& k = w.table()[i];
        w[i] = scale * std::pow(k.norm(), -decay) * rng.next_complex_gaussian();
    }
    return w;
}

/// Field value by direct summation over the full lattice (independent of
/// SpectralField::eval's half-lattice folding).
inline std::complex<double> eval_full_lattice(const SpectralField& w, double x, double y) {
    std::complex<double> acc{0.0, 0.0};
    const int n = w.cutoff();
    for (int k2 = -n; k2 <= n; ++k2)
        for (int k1 = -n; k1 <= n; ++k1) {
            if (k1 == 0 && k2 == 0) continue;
            const double phase = kTwoPi * (k1 * x + k2 * y);
            acc += w.at({k1, k2}) * std::complex<double>{std::cos(phase), std::sin(phase)};
        }
    return acc;
}

/// Fourier coefficient of the pointwise product u . grad w by rectangle-rule
/// quadrature on a grid fine enough to be exact for trig polynomials of the
/// degrees involved (grid > 3N per axis).
inline SpectralField b0_pointwise_oracle(const SpectralField& h, const SpectralField& w) {
    const int n = h.cutoff();
    const int g = 4 * n + 2;
    SpectralField out(n);
    std::vector<double> u1(g * g), u2(g * g), w1(g * g), w2(g * g);
    for (int j2 = 0; j2 < g; ++j2)
        for (int j1 = 0; j1 < g; ++j1) {
            const double x = static_cast<double>(j1) / g;
            const double y = static_cast<double>(j2) / g;
            double a1 = 0.0, a2 = 0.0, g1 = 0.0, g2 = 0.0;
            for (int k2 = -n; k2 <= n; ++k2)
                for (int k1 = -n; k1 <= n; ++k1) {
                    if (k1 == 0 && k2 == 0) continue;
                    const double phase = kTwoPi * (k1 * x + k2 * y);
                    const std::complex<double> e{std::cos(phase), std::sin(phase)};
                    const std::complex<double> hk = h.at({k1, k2});
                    const std::complex<double> wk = w.at({k1, k2});
                    const double kk = k1 * k1 + k2 * k2;
                    const std::complex<double> f =
                        std::complex<double>{0.0, -1.0} / (kTwoPi * kk) * hk * e;
                    a1 += (static_cast<double>(k2) * f).real();
                    a2 += (static_cast<double>(-k1) * f).real();
                    const std::complex<double> gradf =
                        std::complex<double>{0.0, kTwoPi} * wk * e;
                    g1 += (static_cast<double>(k1) * gradf).real();
                    g2 += (static_cast<double>(k2) * gradf).real();
                }
            u1[j2 * g + j1] = a1;
            u2[j2 * g + j1] = a2;
            w1[j2 * g + j1] = g1;
            w2[j2 * g + j1] = g2;
        }
    for (std::size_t m = 0; m < out.mode_count(); ++m) {
        const auto& k = out.table()[m];
        std::complex<double> acc{0.0, 0.0};
        for (int j2 = 0; j2 < g; ++j2)
            for (int j1 = 0; j1 < g; ++j1) {
                const double x = static_cast<double>(j1) / g;
                const double y = static_cast<double>(j2) / g;
                const double p = u1[j2 * g + j1] * w1[j2 * g + j1] +
                                 u2[j2 * g + j1] * w2[j2 * g + j1];
                const double phase = -kTwoPi * (k.k1 * x + k.k2 * y);
                acc += p * std::complex<double>{std::cos(phase), std::sin(phase)};
            }
        out[m] = acc / static_cast<double>(g * g);
    }
    return out;
}

inline double rel_err(double got, double want) {
    const double denom = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / denom;
}

inline double field_rel_err(const SpectralField& got, const SpectralField& want) {
    SpectralField diff = got;
    diff -= want;
    const double denom = std::max(l2_norm(want), 1e-300);
    return l2_norm(diff) / denom;
}

}  // namespace vortrace::testing
