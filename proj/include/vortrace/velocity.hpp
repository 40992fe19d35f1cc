#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "vortrace/field.hpp"

namespace vortrace {

/// Divergence-free velocity field stored as two spectral components sharing a
/// cutoff.
struct VelocityField {
    SpectralField u1;
    SpectralField u2;

    explicit VelocityField(int cutoff) : u1(cutoff), u2(cutoff) {}
    int cutoff() const { return u1.cutoff(); }

    /// max over modes of |k . u_k| / (|k| |u_k|); zero for the exact kernel.
    double divergence_defect() const {
        double worst = 0.0;
        for (std::size_t i = 0; i < u1.mode_count(); ++i) {
            const Wavevector& k = u1.table()[i];
            const Complex div = static_cast<double>(k.k1) * u1[i] + static_cast<double>(k.k2) * u2[i];
            const double mag = std::sqrt(std::norm(u1[i]) + std::norm(u2[i]));
            if (mag > 0.0) worst = std::max(worst, std::abs(div) / (k.norm() * mag));
        }
        return worst;
    }
};

/// Biot-Savart operator: u_k = (-i / (2 pi |k|^2)) k^perp w_k, normalized so
/// that rot(biot_savart(w)) = w exactly for e_k = e^{2 pi i k.x}.
inline VelocityField biot_savart(const SpectralField& w) {
    VelocityField u(w.cutoff());
    const Complex minus_i{0.0, -1.0};
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const Complex f = minus_i / (kTwoPi * k.norm2()) * w[i];
        u.u1[i] = static_cast<double>(k.k2) * f;
        u.u2[i] = static_cast<double>(-k.k1) * f;
    }
    return u;
}

/// Scalar rotation rot(v) = d2 v1 - d1 v2; coefficient 2 pi i (k2 v1_k - k1 v2_k).
inline SpectralField rot(const VelocityField& v) {
    SpectralField w(v.cutoff());
    const Complex two_pi_i{0.0, kTwoPi};
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        w[i] = two_pi_i * (static_cast<double>(k.k2) * v.u1[i] - static_cast<double>(k.k1) * v.u2[i]);
    }
    return w;
}

/// Velocity of the flow induced by vorticity w, evaluated at a point by
/// direct mode summation (exact, no interpolation).
inline Vec2 eval_velocity(const SpectralField& w, const Vec2& x) {
    double ux = 0.0, uy = 0.0;
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const double phase = kTwoPi * (k.k1 * x.x + k.k2 * x.y);
        // u_k e^{i phase} + conj: 2 Re((-i/(2 pi |k|^2)) k^perp w_k e^{i phase})
        const Complex e{std::cos(phase), std::sin(phase)};
        const Complex f = Complex{0.0, -1.0} / (kTwoPi * k.norm2()) * w[i] * e;
        ux += 2.0 * (static_cast<double>(k.k2) * f).real();
        uy += 2.0 * (static_cast<double>(-k.k1) * f).real();
    }
    return {ux, uy};
}

/// psi*(w) = K(w)(0): the point observable. Equals eval_velocity(w, 0) with
/// the trigonometry folded away: sum over stored modes of
/// (k2, -k1) Im(w_k) / (pi |k|^2).
inline Vec2 psi_star(const SpectralField& w) {
    double ux = 0.0, uy = 0.0;
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const double f = w[i].imag() / (kPi * k.norm2());
        ux += k.k2 * f;
        uy += -k.k1 * f;
    }
    return {ux, uy};
}

/// Bound constant for |eval_velocity(w, .)| <= c |w|_1 over the truncation:
/// Cauchy-Schwarz over modes of the per-mode factor 1/(2 pi |k|).
inline double psi_star_bound_constant(int cutoff) {
    const ModeTable table(cutoff);
    double acc = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
        acc += 1.0 / (static_cast<double>(table[i].norm2()) * table[i].norm2());
    return std::sqrt(2.0 * acc) / kTwoPi;
}

}  // namespace vortrace
