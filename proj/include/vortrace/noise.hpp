#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortrace/field.hpp"
#include "vortrace/rng.hpp"

namespace vortrace {

/// Diagonal covariance operator Q: (Q w)_k = q_k w_k with real, even q.
/// Storage over the half-lattice makes evenness structural. Default
/// parametric spectrum q_k = a |k|^{-s} with per-mode overrides.
class NoiseSpec {
  public:
    NoiseSpec() = default;

    static NoiseSpec power_law(int cutoff, double amplitude = 1.0, double exponent = 3.0) {
        NoiseSpec spec;
        spec.cutoff_ = cutoff;
        spec.amplitude_ = amplitude;
        spec.exponent_ = exponent;
        const ModeTable table(cutoff);
        spec.q_.resize(table.size());
        for (std::size_t i = 0; i < table.size(); ++i)
            spec.q_[i] = amplitude * std::pow(table[i].norm(), -exponent);
        return spec;
    }

    static NoiseSpec zero(int cutoff) { return power_law(cutoff, 0.0, 0.0); }

    int cutoff() const { return cutoff_; }
    std::size_t mode_count() const { return q_.size(); }
    double amplitude() const { return amplitude_; }
    double exponent() const { return exponent_; }

    double q(std::size_t slot) const { return q_[slot]; }
    const std::vector<double>& values() const { return q_; }

    double q_at(const Wavevector& k) const {
        const ModeTable table(cutoff_);
        const Wavevector h = k.in_half_lattice() ? k : -k;
        const std::size_t i = table.index_of(h);
        if (i == ModeTable::npos) return 0.0;
        return q_[i];
    }

    void override_mode(const Wavevector& k, double value) {
        const ModeTable table(cutoff_);
        const Wavevector h = k.in_half_lattice() ? k : -k;
        const std::size_t i = table.index_of(h);
        if (i == ModeTable::npos)
            throw std::invalid_argument("NoiseSpec: override mode outside cutoff");
        q_[i] = value;
    }

    /// Trivial null space: every stored mode forced.
    bool non_degenerate() const {
        for (double v : q_)
            if (v == 0.0) return false;
        return !q_.empty();
    }

    /// trQ^2 over the stored (truncated) lattice, both halves.
    double tr_q2() const {
        double acc = 0.0;
        for (double v : q_) acc += v * v;
        return 2.0 * acc;
    }

    /// Operator norm max_k |q_k|.
    double operator_norm() const {
        double m = 0.0;
        for (double v : q_) m = std::max(m, std::abs(v));
        return m;
    }

  private:
    int cutoff_ = 0;
    double amplitude_ = 0.0;
    double exponent_ = 0.0;
    std::vector<double> q_;
};

/// Hilbert-Schmidt norm of Q as a map H -> H^r:
/// sqrt(sum over the full lattice of |k|^{2r} q_k^2).
inline double hs_norm(const NoiseSpec& q, double r) {
    const ModeTable table(q.cutoff());
    double acc = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
        acc += std::pow(static_cast<double>(table[i].norm2()), r) * q.q(i) * q.q(i);
    return std::sqrt(2.0 * acc);
}

/// One Wiener increment Q dW over a step: per stored mode a complex Gaussian
/// of total variance dt (real/imag parts independent, dt/2 each) scaled by
/// q_k; the implied -k coefficient is the conjugate, so the field is real.
/// Ito isometry: E |result|^2 = dt * trQ^2.
inline SpectralField sample_increment(const NoiseSpec& q, double dt, CounterRng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("sample_increment: dt must be > 0");
    SpectralField out(q.cutoff());
    const double root_dt = std::sqrt(dt);
    for (std::size_t i = 0; i < out.mode_count(); ++i)
        out[i] = q.q(i) * root_dt * rng.next_complex_gaussian();
    return out;
}

/// Exact one-step update of the per-mode stochastic convolution
/// integral int_0^t e^{Delta(t-s)} Q dW(s):
///   c -> e^{-lambda dt} c + q_k sqrt((1 - e^{-2 lambda dt})/(2 lambda)) g,
/// lambda = lambda_factor |k|^2. The noise term carries the exact variance
/// of the mild form over one step.
inline Complex ou_mode_update(Complex c, const Wavevector& k, double q_k, double dt, Complex g,
                              double lambda_factor = kFourPiSq) {
    if (!(dt > 0.0)) throw std::invalid_argument("ou_mode_update: dt must be > 0");
    const double lambda = lambda_factor * k.norm2();
    const double decay = std::exp(-lambda * dt);
    const double amp = q_k * std::sqrt(-std::expm1(-2.0 * lambda * dt) / (2.0 * lambda));
    return decay * c + amp * g;
}

}  // namespace vortrace
