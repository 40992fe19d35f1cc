#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vortrace/fft.hpp"
#include "vortrace/field.hpp"
#include "vortrace/velocity.hpp"

namespace vortrace {

enum class BilinearKind { B0, B1 };
enum class BilinearBackend { Convolution, PaddedTransform };

namespace detail {

/// Full-lattice expansion of a field into a (2N+1)^2 box, index (k1+N) +
/// (k2+N)*(2N+1). The k = 0 entry is zero.
inline void expand_full(const SpectralField& w, std::vector<Complex>& box) {
    const int n = w.cutoff();
    const int side = 2 * n + 1;
    box.assign(static_cast<std::size_t>(side) * side, Complex{0.0, 0.0});
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        box[static_cast<std::size_t>(k.k2 + n) * side + (k.k1 + n)] = w[i];
        box[static_cast<std::size_t>(-k.k2 + n) * side + (-k.k1 + n)] = std::conj(w[i]);
    }
}

}  // namespace detail

/// Reference backend: B0(h, w) = Pi_N(K(h) . grad w) as the exact Galerkin
/// truncation of the convolution
///   [B0]_k = sum_{p+q=k} ((p^perp . q) / |p|^2) h_p w_q,
/// all sums over the stored square lattice. O(modes^2); the oracle the fast
/// backend is checked against.
inline SpectralField b0_convolution(const SpectralField& h, const SpectralField& w) {
    h.check_same(w);
    const int n = h.cutoff();
    const int side = 2 * n + 1;
    std::vector<Complex> hbox, wbox;
    detail::expand_full(h, hbox);
    detail::expand_full(w, wbox);
    SpectralField out(n);
    for (std::size_t i = 0; i < out.mode_count(); ++i) {
        const Wavevector& k = out.table()[i];
        Complex acc{0.0, 0.0};
        for (int p2 = -n; p2 <= n; ++p2) {
            const int q2 = k.k2 - p2;
            if (q2 < -n || q2 > n) continue;
            for (int p1 = -n; p1 <= n; ++p1) {
                if (p1 == 0 && p2 == 0) continue;
                const int q1 = k.k1 - p1;
                if (q1 < -n || q1 > n) continue;
                if (q1 == 0 && q2 == 0) continue;
                const Complex hp = hbox[static_cast<std::size_t>(p2 + n) * side + (p1 + n)];
                if (hp == Complex{0.0, 0.0}) continue;
                const Complex wq = wbox[static_cast<std::size_t>(q2 + n) * side + (q1 + n)];
                // p^perp . q = p2 q1 - p1 q2
                const double coupling =
                    static_cast<double>(p2 * q1 - p1 * q2) / static_cast<double>(p1 * p1 + p2 * p2);
                acc += coupling * hp * wq;
            }
        }
        out[i] = acc;
    }
    return out;
}

/// Scratch buffers for the zero-padded transform backend. One per solver
/// instance; not shared between threads.
class TransformWorkspace {
  public:
    explicit TransformWorkspace(int cutoff)
        : cutoff_(cutoff),
          grid_(dealias_grid(cutoff)),
          vel_(grid_),
          grad_(grid_),
          prod_(grid_) {}

    int cutoff() const { return cutoff_; }
    int grid() const { return grid_; }

    /// Fast backend for B0(h, w); bitwise-deterministic given inputs.
    void b0(const SpectralField& h, const SpectralField& w, SpectralField& out) {
        h.check_same(w);
        if (h.cutoff() != cutoff_)
            throw std::invalid_argument("TransformWorkspace: cutoff mismatch");
        load_velocity(h);
        load_gradient(w);
        multiply_advect();
        store(out);
    }

    /// Velocity grid of K(h) packed as u1 + i u2 (both real on the grid).
    void load_velocity(const SpectralField& h) {
        vel_.clear();
        auto* a = vel_.data();
        const Complex minus_i{0.0, -1.0};
        for (std::size_t i = 0; i < h.mode_count(); ++i) {
            const Wavevector& k = h.table()[i];
            const Complex f = minus_i / (kTwoPi * k.norm2()) * h[i];
            const Complex u1 = static_cast<double>(k.k2) * f;
            const Complex u2 = static_cast<double>(-k.k1) * f;
            a[vel_.slot(k.k1, k.k2)] = u1 + Complex{0.0, 1.0} * u2;
            a[vel_.slot(-k.k1, -k.k2)] = std::conj(u1) + Complex{0.0, 1.0} * std::conj(u2);
        }
        vel_.synthesize();
    }

    /// Gradient grid of w packed as d1w + i d2w.
    void load_gradient(const SpectralField& w) {
        grad_.clear();
        auto* b = grad_.data();
        const Complex two_pi_i{0.0, kTwoPi};
        for (std::size_t i = 0; i < w.mode_count(); ++i) {
            const Wavevector& k = w.table()[i];
            const Complex g1 = two_pi_i * static_cast<double>(k.k1) * w[i];
            const Complex g2 = two_pi_i * static_cast<double>(k.k2) * w[i];
            b[grad_.slot(k.k1, k.k2)] = g1 + Complex{0.0, 1.0} * g2;
            b[grad_.slot(-k.k1, -k.k2)] = std::conj(g1) + Complex{0.0, 1.0} * std::conj(g2);
        }
        grad_.synthesize();
    }

    /// prod := u . grad w pointwise, using the packed layout.
    void multiply_advect() {
        const auto* a = vel_.data();
        const auto* b = grad_.data();
        auto* c = prod_.data();
        const std::size_t n = prod_.size();
        for (std::size_t j = 0; j < n; ++j)
            c[j] = Complex{a[j].real() * b[j].real() + a[j].imag() * b[j].imag(), 0.0};
        prod_.analyze();
    }

    /// Truncate the analyzed product back to the stored lattice.
    void store(SpectralField& out) {
        if (out.cutoff() != cutoff_) out = SpectralField(cutoff_);
        const double scale = 1.0 / (static_cast<double>(grid_) * grid_);
        const auto* c = prod_.data();
        for (std::size_t i = 0; i < out.mode_count(); ++i) {
            const Wavevector& k = out.table()[i];
            out[i] = c[prod_.slot(k.k1, k.k2)] * scale;
        }
    }

  private:
    int cutoff_;
    int grid_;
    GridBuffer vel_;
    GridBuffer grad_;
    GridBuffer prod_;
};

/// B1(h, w) = K(h)(0) . grad w: constant-coefficient advection, exact in
/// coefficient space (no product truncation involved).
inline SpectralField b1_apply(const SpectralField& h, const SpectralField& w) {
    h.check_same(w);
    const Vec2 v = eval_velocity(h, Vec2{0.0, 0.0});
    SpectralField out(w.cutoff());
    const Complex two_pi_i{0.0, kTwoPi};
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        out[i] = two_pi_i * (v.x * k.k1 + v.y * k.k2) * w[i];
    }
    return out;
}

/// bilinear_b dispatch matching the two advection forms.
inline SpectralField bilinear_b(const SpectralField& h, const SpectralField& w, BilinearKind kind,
                                BilinearBackend backend = BilinearBackend::Convolution) {
    if (kind == BilinearKind::B1) return b1_apply(h, w);
    if (backend == BilinearBackend::Convolution) return b0_convolution(h, w);
    TransformWorkspace ws(h.cutoff());
    SpectralField out(h.cutoff());
    ws.b0(h, w, out);
    return out;
}

}  // namespace vortrace
