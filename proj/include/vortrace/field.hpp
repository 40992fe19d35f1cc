#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "vortrace/lattice.hpp"
#include "vortrace/util.hpp"

namespace vortrace {

using Complex = std::complex<double>;

/// Mean-zero real scalar field on the 2-torus [-1/2,1/2]^2, stored as
/// truncated Fourier coefficients over the half-lattice Z^2_+ with square
/// cutoff max(|k1|,|k2|) <= N. The full lattice is implied by conjugation
/// (w_{-k} = conj(w_k)), so reality and evenness are structural.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(int cutoff)
        : table_(shared_table(cutoff)), coeffs_(table_->size(), Complex{0.0, 0.0}) {}

    int cutoff() const { return table_ ? table_->cutoff() : 0; }
    std::size_t mode_count() const { return coeffs_.size(); }
    const ModeTable& table() const { return *table_; }
    bool empty() const { return coeffs_.empty(); }

    const Complex& operator[](std::size_t slot) const { return coeffs_[slot]; }
    Complex& operator[](std::size_t slot) { return coeffs_[slot]; }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    std::vector<Complex>& coeffs() { return coeffs_; }

    /// Coefficient at an arbitrary lattice point (conjugated on the implied
    /// half; zero at k = 0 and beyond the cutoff).
    Complex at(const Wavevector& k) const {
        if (k.k1 == 0 && k.k2 == 0) return {0.0, 0.0};
        if (k.ring() > cutoff()) return {0.0, 0.0};
        if (k.in_half_lattice()) {
            const std::size_t i = table_->index_of(k);
            return coeffs_[i];
        }
        const std::size_t i = table_->index_of(-k);
        return std::conj(coeffs_[i]);
    }

    /// Sets the coefficient at a half-lattice mode (throws otherwise).
    void set(const Wavevector& k, Complex v) {
        if (!k.in_half_lattice())
            throw std::invalid_argument("SpectralField::set: mode not in stored half-lattice");
        const std::size_t i = table_->index_of(k);
        if (i == ModeTable::npos)
            throw std::invalid_argument("SpectralField::set: mode outside cutoff");
        coeffs_[i] = v;
    }

    // --- arithmetic (cutoffs must match) ---
    SpectralField& operator+=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        check_same(o);
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
        return *this;
    }
    SpectralField& operator*=(double s) {
        for (auto& c : coeffs_) c *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(SpectralField a, double s) { return a *= s; }
    friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

    void check_same(const SpectralField& o) const {
        if (cutoff() != o.cutoff())
            throw std::invalid_argument("SpectralField: cutoff mismatch");
    }

    /// Pointwise field value w(x); real by construction.
    double eval(const Vec2& x) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) {
            const Wavevector& k = (*table_)[i];
            const double phase = kTwoPi * (k.k1 * x.x + k.k2 * x.y);
            // w_k e_k + conj pair = 2 Re(w_k e^{i phase})
            acc += 2.0 * (coeffs_[i].real() * std::cos(phase) - coeffs_[i].imag() * std::sin(phase));
        }
        return acc;
    }

    bool all_finite() const {
        for (const auto& c : coeffs_)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

  private:
    // One immutable table per cutoff, shared by every field of that size.
    static std::shared_ptr<const ModeTable> shared_table(int cutoff) {
        static std::vector<std::shared_ptr<const ModeTable>> cache;  // index = cutoff
        static std::mutex mu;
        std::lock_guard<std::mutex> lock(mu);
        if (cache.size() <= static_cast<std::size_t>(cutoff))
            cache.resize(static_cast<std::size_t>(cutoff) + 1);
        auto& slot = cache[static_cast<std::size_t>(cutoff)];
        if (!slot) slot = std::make_shared<ModeTable>(cutoff);
        return slot;
    }

    std::shared_ptr<const ModeTable> table_;
    std::vector<Complex> coeffs_;
};

/// Graph norm |w|_r = sqrt(sum over the full lattice of |k|^{2r} |w_k|^2).
/// Uses |k| (not 2*pi*|k|); r = 0 is the L2 norm, r = 1 the V norm.
inline double hr_norm(const SpectralField& w, double r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const double wk2 = std::norm(w[i]);
        double weight = 1.0;
        if (r == 1.0)
            weight = static_cast<double>(k.norm2());
        else if (r != 0.0)
            weight = std::pow(static_cast<double>(k.norm2()), r);
        acc += weight * wk2;
    }
    return std::sqrt(2.0 * acc);  // both half-lattices
}

inline double l2_norm(const SpectralField& w) { return hr_norm(w, 0.0); }
inline double v_norm(const SpectralField& w) { return hr_norm(w, 1.0); }

/// L2 inner product <a,b> over the full lattice (real for real fields).
inline double inner(const SpectralField& a, const SpectralField& b) {
    a.check_same(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < a.mode_count(); ++i)
        acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    return 2.0 * acc;
}

/// Sum over the full lattice of lambda_k |w_k|^2 with lambda_k = factor*|k|^2.
/// This is the dissipation functional matching the solver's semigroup.
inline double lambda_weighted_energy(const SpectralField& w, double lambda_factor) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.mode_count(); ++i)
        acc += w.table()[i].norm2() * std::norm(w[i]);
    return 2.0 * lambda_factor * acc;
}

/// translate(w, x)(y) = w(y + x): coefficients gain the phase e^{+2 pi i k.x}.
inline SpectralField translate(const SpectralField& w, const Vec2& x) {
    SpectralField out(w.cutoff());
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const double phase = kTwoPi * (k.k1 * x.x + k.k2 * x.y);
        out[i] = w[i] * Complex{std::cos(phase), std::sin(phase)};
    }
    return out;
}

/// Heat semigroup e^{Delta t}: coefficient decay e^{-lambda_k t} with
/// lambda_k = 4 pi^2 |k|^2.
inline SpectralField heat_semigroup(const SpectralField& w, double t) {
    if (t < 0.0) throw std::invalid_argument("heat_semigroup: t must be >= 0");
    SpectralField out(w.cutoff());
    for (std::size_t i = 0; i < w.mode_count(); ++i)
        out[i] = w[i] * std::exp(-kFourPiSq * w.table()[i].norm2() * t);
    return out;
}

/// Projection onto modes with max(|k1|,|k2|) <= n (Galerkin truncation).
inline SpectralField truncate(const SpectralField& w, int n) {
    SpectralField out(n);
    for (std::size_t i = 0; i < out.mode_count(); ++i) {
        const Wavevector& k = out.table()[i];
        out[i] = w.at(k);
    }
    return out;
}

/// Point reflection (S w)(x) = w(-x): coefficients conjugate.
inline SpectralField reflect(const SpectralField& w) {
    SpectralField out(w.cutoff());
    for (std::size_t i = 0; i < w.mode_count(); ++i) out[i] = std::conj(w[i]);
    return out;
}

}  // namespace vortrace
