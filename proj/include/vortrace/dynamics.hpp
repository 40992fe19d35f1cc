#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortrace/bilinear.hpp"
#include "vortrace/field.hpp"
#include "vortrace/noise.hpp"
#include "vortrace/rng.hpp"
#include "vortrace/velocity.hpp"

namespace vortrace {

/// Which truncated system a solver instance integrates.
///  - Eulerian:       d xi = [Delta xi - B0(xi)] dt + Q dW
///  - Lagrangian:     d om = [Delta om - B0(om) + B1(om)] dt + Q dW
///  - Deterministic:  dy/dt = Delta y + B(y),  B = -B0 + B1, Q = 0
enum class EquationKind { Eulerian, Lagrangian, Deterministic };

struct SolverParams {
    EquationKind kind = EquationKind::Lagrangian;
    double dt = 1e-3;
    double lambda_factor = kFourPiSq;  // lambda_k = lambda_factor * |k|^2
    bool nonlinearity = true;          // false: linear OU oracle mode (B0 = B1 = 0)
    double blowup_threshold = 1e12;
};

struct PathRecord;

class BlowUpError : public std::runtime_error {
  public:
    BlowUpError(double t, double worst, const std::string& what_arg)
        : std::runtime_error(what_arg), time(t), worst_coefficient(worst) {}
    double time;
    double worst_coefficient;
    std::shared_ptr<PathRecord> partial;  // attached by simulate()
};

class InvariantViolation : public std::runtime_error {
  public:
    InvariantViolation(double t, const std::string& what_arg)
        : std::runtime_error(what_arg), worst_time(t) {}
    double worst_time;
};

/// Per-(step, mode slot) complex Gaussians driving a trajectory. The default
/// source addresses a counter RNG at counter = step * 2^20 + slot, so a draw
/// depends only on (seed, stream, step, slot): reruns, resumes and cutoff
/// changes with matched forcing all see identical noise.
class NoiseSource {
  public:
    virtual ~NoiseSource() = default;
    virtual Complex gaussian(std::uint64_t step, std::size_t slot) = 0;
};

inline constexpr std::uint64_t kSlotBits = 20;

class RngNoiseSource final : public NoiseSource {
  public:
    RngNoiseSource(std::uint64_t seed, std::uint64_t stream) : rng_(seed, stream) {}
    explicit RngNoiseSource(const RngState& state) : rng_(state) {}

    Complex gaussian(std::uint64_t step, std::size_t slot) override {
        rng_.seek((step << kSlotBits) + slot);
        return rng_.next_complex_gaussian();
    }

    const RngState& state() const { return rng_.state(); }

  private:
    CounterRng rng_;
};

/// Conjugates every draw: drives the point-reflected trajectory of the same
/// realization (antithetic pairs for v* estimates).
class ConjugateNoiseSource final : public NoiseSource {
  public:
    explicit ConjugateNoiseSource(std::shared_ptr<NoiseSource> inner) : inner_(std::move(inner)) {}
    Complex gaussian(std::uint64_t step, std::size_t slot) override {
        return std::conj(inner_->gaussian(step, slot));
    }

  private:
    std::shared_ptr<NoiseSource> inner_;
};

/// All-zero draws: realizes the deterministic path of a stochastic setup
/// without degenerating Q itself.
class ZeroNoiseSource final : public NoiseSource {
  public:
    Complex gaussian(std::uint64_t, std::size_t) override { return {0.0, 0.0}; }
};

/// Presents the Brownian path of a fine-step source at twice the step size:
/// the stochastic convolution over [t, t+2h] decomposes as
///   e^{-lambda h} I_1 + I_2,  I_j the fine-step integrals,
/// so the coarse draw is (e^{-lambda h} a_f g_1 + a_f g_2) / a_c with the
/// per-step amplitudes a_f, a_c. Step-refinement studies couple coarse and
/// fine runs to the same realization this way (the ratio-4 convergence
/// checks need the constant to cancel).
class CoarsenedNoiseSource final : public NoiseSource {
  public:
    CoarsenedNoiseSource(std::shared_ptr<NoiseSource> fine, const NoiseSpec& noise,
                         double fine_dt, double lambda_factor = kFourPiSq)
        : fine_(std::move(fine)) {
        const ModeTable table(noise.cutoff());
        w1_.resize(table.size());
        w2_.resize(table.size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            const double lambda = lambda_factor * table[i].norm2();
            const double a_f = std::sqrt(-std::expm1(-2.0 * lambda * fine_dt) / (2.0 * lambda));
            const double a_c =
                std::sqrt(-std::expm1(-4.0 * lambda * fine_dt) / (2.0 * lambda));
            w1_[i] = std::exp(-lambda * fine_dt) * a_f / a_c;
            w2_[i] = a_f / a_c;
        }
    }

    Complex gaussian(std::uint64_t step, std::size_t slot) override {
        return w1_[slot] * fine_->gaussian(2 * step, slot) +
               w2_[slot] * fine_->gaussian(2 * step + 1, slot);
    }

  private:
    std::shared_ptr<NoiseSource> fine_;
    std::vector<double> w1_;
    std::vector<double> w2_;
};

/// Replays precomputed draws; used by step-refinement consistency tests.
class PlaybackNoiseSource final : public NoiseSource {
  public:
    PlaybackNoiseSource(std::size_t mode_count, std::vector<Complex> draws)
        : mode_count_(mode_count), draws_(std::move(draws)) {}
    Complex gaussian(std::uint64_t step, std::size_t slot) override {
        const std::size_t i = static_cast<std::size_t>(step) * mode_count_ + slot;
        if (i >= draws_.size()) throw std::out_of_range("PlaybackNoiseSource: exhausted");
        return draws_[i];
    }

  private:
    std::size_t mode_count_;
    std::vector<Complex> draws_;
};

/// One equation instance: field, clock (t = step * dt), forcing spectrum and
/// noise source. Single-owner; sendable between threads, never shared.
class SolverState {
  public:
    SolverState(SolverParams params, SpectralField w0, NoiseSpec noise,
                std::shared_ptr<NoiseSource> source)
        : params_(params),
          field_(std::move(w0)),
          noise_(std::move(noise)),
          source_(std::move(source)),
          drift_(field_.cutoff()) {
        if (field_.cutoff() != noise_.cutoff())
            throw std::invalid_argument("SolverState: field and noise cutoffs differ");
        if (!(params_.dt > 0.0)) throw std::invalid_argument("SolverState: dt must be > 0");
        if (field_.mode_count() >= (1ull << kSlotBits))
            throw std::invalid_argument("SolverState: cutoff too large for noise addressing");
        precompute();
        if (params_.nonlinearity) ws_ = std::make_unique<TransformWorkspace>(field_.cutoff());
    }

    SolverState(SolverParams params, SpectralField w0, NoiseSpec noise, std::uint64_t seed,
                std::uint64_t stream = 0)
        : SolverState(params, std::move(w0), std::move(noise),
                      std::make_shared<RngNoiseSource>(seed, stream)) {}

    const SolverParams& params() const { return params_; }
    const SpectralField& field() const { return field_; }
    SpectralField& field() { return field_; }
    const NoiseSpec& noise() const { return noise_; }
    double t() const { return static_cast<double>(step_) * params_.dt; }
    std::uint64_t step_index() const { return step_; }
    void set_step_index(std::uint64_t s) { step_ = s; }

    /// Instantaneous drift (everything except Delta and noise) at the
    /// current field, written into `out`.
    void drift(SpectralField& out) {
        if (!params_.nonlinearity) {
            if (out.cutoff() != field_.cutoff()) out = SpectralField(field_.cutoff());
            for (auto& c : out.coeffs()) c = Complex{0.0, 0.0};
            return;
        }
        ws_->b0(field_, field_, out);      // out = B0(w, w)
        for (auto& c : out.coeffs()) c = -c;
        if (params_.kind != EquationKind::Eulerian) {
            const Vec2 v = psi_star(field_);
            const Complex two_pi_i{0.0, kTwoPi};
            for (std::size_t i = 0; i < field_.mode_count(); ++i) {
                const Wavevector& k = field_.table()[i];
                out[i] += two_pi_i * (v.x * k.k1 + v.y * k.k2) * field_[i];
            }
        }
    }

    /// Advance one step of the exponential Euler-Maruyama scheme: per mode
    ///   c <- e^{-lambda dt} (c + dt * drift) + q sqrt((1-e^{-2 lambda dt})/(2 lambda)) g.
    /// The captured noise field (if requested) is the additive term.
    void step(SpectralField* captured_noise = nullptr) {
        drift(drift_);
        const bool stochastic = params_.kind != EquationKind::Deterministic;
        const double dt = params_.dt;
        double worst = 0.0;
        for (std::size_t i = 0; i < field_.mode_count(); ++i) {
            Complex c = decay_[i] * (field_[i] + dt * drift_[i]);
            if (stochastic) {
                const Complex g = source_->gaussian(step_, i);
                const Complex n = noise_amp_[i] * g;
                c += n;
                if (captured_noise) (*captured_noise)[i] = n;
            } else if (captured_noise) {
                (*captured_noise)[i] = Complex{0.0, 0.0};
            }
            field_[i] = c;
            worst = std::max(worst, std::max(std::abs(c.real()), std::abs(c.imag())));
        }
        ++step_;
        if (!(worst <= params_.blowup_threshold) || !std::isfinite(worst))
            throw BlowUpError(t(), worst,
                              "solver blow-up at t = " + std::to_string(t()) +
                                  " (worst coefficient " + std::to_string(worst) + ")");
    }

    /// Exact noise amplitude per mode for one step of the mild form.
    double noise_amplitude(std::size_t slot) const { return noise_amp_[slot]; }
    double decay_factor(std::size_t slot) const { return decay_[slot]; }

  private:
    void precompute() {
        const std::size_t m = field_.mode_count();
        decay_.resize(m);
        noise_amp_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const double lambda = params_.lambda_factor * field_.table()[i].norm2();
            decay_[i] = std::exp(-lambda * params_.dt);
            noise_amp_[i] =
                noise_.q(i) * std::sqrt(-std::expm1(-2.0 * lambda * params_.dt) / (2.0 * lambda));
        }
    }

    SolverParams params_;
    SpectralField field_;
    NoiseSpec noise_;
    std::shared_ptr<NoiseSource> source_;
    SpectralField drift_;
    std::unique_ptr<TransformWorkspace> ws_;
    std::uint64_t step_ = 0;
    std::vector<double> decay_;
    std::vector<double> noise_amp_;
};

/// Reduced observables along a trajectory plus running trapezoid
/// accumulators (displacement integral of psi*, dissipation integrals).
struct PathRecord {
    std::vector<double> times;
    std::vector<double> l2sq;        // |w|^2
    std::vector<double> h1sq;        // |w|_1^2
    std::vector<double> lambda_sq;   // sum lambda_k |w_k|^2 (solver convention)
    std::vector<Vec2> psi;           // psi*(w) = K(w)(0)
    std::vector<Vec2> displacement;  // trapezoid of psi* from 0 to t
    std::vector<double> int_h1sq;    // trapezoid of |w|_1^2
    std::vector<double> int_lambda_sq;
    std::vector<SpectralField> fields;        // optional snapshots
    std::vector<SpectralField> noise_fields;  // optional per-step noise terms

    SpectralField final_field;
    double final_time = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    std::size_t samples() const { return times.size(); }
};

struct SimulateOptions {
    std::uint64_t cadence = 1;   // record every cadence-th step (0 = endpoints only)
    bool record_fields = false;
    bool record_noise = false;   // per-step additive noise terms (dense)
};

/// Integrates nsteps = round(T/dt) steps, recording observables. Bitwise
/// deterministic given (params, w0, noise, seed/stream).
inline PathRecord simulate(SolverState& state, double T, const SimulateOptions& opts = {}) {
    if (T < 0.0) throw std::invalid_argument("simulate: T must be >= 0");
    const double dt = state.params().dt;
    const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(T / dt));
    PathRecord rec;

    Vec2 disp{0.0, 0.0};
    double acc_h1 = 0.0, acc_lam = 0.0;
    Vec2 psi_prev = psi_star(state.field());
    double h1_prev = std::pow(hr_norm(state.field(), 1.0), 2);
    double lam_prev = lambda_weighted_energy(state.field(), state.params().lambda_factor);

    auto record = [&](const SolverState& s, const Vec2& psi_now, double h1_now, double lam_now) {
        rec.times.push_back(s.t());
        rec.l2sq.push_back(std::pow(l2_norm(s.field()), 2));
        rec.h1sq.push_back(h1_now);
        rec.lambda_sq.push_back(lam_now);
        rec.psi.push_back(psi_now);
        rec.displacement.push_back(disp);
        rec.int_h1sq.push_back(acc_h1);
        rec.int_lambda_sq.push_back(acc_lam);
        if (opts.record_fields) rec.fields.push_back(s.field());
    };

    record(state, psi_prev, h1_prev, lam_prev);
    SpectralField noise_term(state.field().cutoff());
    for (std::uint64_t n = 0; n < nsteps; ++n) {
        try {
            state.step(opts.record_noise ? &noise_term : nullptr);
        } catch (BlowUpError& e) {
            rec.final_field = state.field();
            rec.final_time = state.t();
            e.partial = std::make_shared<PathRecord>(std::move(rec));
            throw;
        }
        if (opts.record_noise) rec.noise_fields.push_back(noise_term);
        const Vec2 psi_now = psi_star(state.field());
        const double h1_now = std::pow(hr_norm(state.field(), 1.0), 2);
        const double lam_now = lambda_weighted_energy(state.field(), state.params().lambda_factor);
        disp += 0.5 * dt * (psi_prev + psi_now);
        acc_h1 += 0.5 * dt * (h1_prev + h1_now);
        acc_lam += 0.5 * dt * (lam_prev + lam_now);
        psi_prev = psi_now;
        h1_prev = h1_now;
        lam_prev = lam_now;
        const bool last = (n + 1 == nsteps);
        if ((opts.cadence != 0 && (n + 1) % opts.cadence == 0 && !last) || last)
            record(state, psi_now, h1_now, lam_now);
    }
    rec.final_field = state.field();
    rec.final_time = state.t();
    return rec;
}

struct DecayReport {
    bool monotone = true;
    double worst_envelope_ratio = 0.0;  // max over samples of |y(t)| / (e^{-4 pi^2 t} |w0|)
    double worst_time = 0.0;
    double final_norm = 0.0;
};

/// Runs the deterministic flow and compares |y(t)| against the heat envelope
/// e^{-4 pi^2 t} |w0| (energy identity: <B(y), y> = 0 and lambda_min = 4 pi^2).
inline DecayReport decay_report(const SpectralField& w0, double T, double dt) {
    SolverParams p;
    p.kind = EquationKind::Deterministic;
    p.dt = dt;
    SolverState s(p, w0, NoiseSpec::zero(w0.cutoff()), 0, 0);
    const double n0 = l2_norm(w0);
    DecayReport rep;
    rep.worst_envelope_ratio = n0 > 0.0 ? 1.0 : 0.0;
    double prev = n0;
    const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(T / dt));
    for (std::uint64_t n = 0; n < nsteps; ++n) {
        s.step();
        const double cur = l2_norm(s.field());
        if (cur > prev) rep.monotone = false;
        if (n0 > 0.0) {
            const double ratio = cur / (std::exp(-kFourPiSq * s.t()) * n0);
            if (ratio > rep.worst_envelope_ratio) {
                rep.worst_envelope_ratio = ratio;
                rep.worst_time = s.t();
            }
        }
        prev = cur;
    }
    rep.final_norm = prev;
    return rep;
}

/// Throwing flavor: envelope violation with the worst time attached.
inline DecayReport deterministic_decay_check(const SpectralField& w0, double T, double dt,
                                             double envelope_tol = 1e-10) {
    DecayReport rep = decay_report(w0, T, dt);
    if (rep.worst_envelope_ratio > 1.0 + envelope_tol)
        throw InvariantViolation(rep.worst_time,
                                 "deterministic decay envelope violated: ratio " +
                                     std::to_string(rep.worst_envelope_ratio) + " at t = " +
                                     std::to_string(rep.worst_time));
    return rep;
}

}  // namespace vortrace
