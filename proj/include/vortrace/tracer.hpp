#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vortrace/dynamics.hpp"
#include "vortrace/field.hpp"
#include "vortrace/velocity.hpp"

namespace vortrace {

/// Tracer positions along a run: the continuous lift x(t) in R^2 (what
/// displacement statistics use) plus the torus-wrapped companion.
struct TracerPath {
    Vec2 x0{0.0, 0.0};
    std::vector<double> times;
    std::vector<Vec2> lift;     // unwrapped positions
    std::vector<Vec2> wrapped;  // lift mod 1 into [-1/2, 1/2)^2

    std::size_t samples() const { return times.size(); }

    static Vec2 wrap(const Vec2& x) {
        auto w = [](double v) {
            double f = v - std::floor(v + 0.5);
            if (f >= 0.5) f -= 1.0;  // keep the half-open convention
            return f;
        };
        return {w(x.x), w(x.y)};
    }

    void push(double t, const Vec2& x) {
        times.push_back(t);
        lift.push_back(x);
        wrapped.push_back(wrap(x));
    }
};

/// One Heun (explicit trapezoid) step of dx/dt = u(t, x) on the lift:
///   x* = x + dt u_t(x);  x+ = x + dt/2 [u_t(x) + u_{t+dt}(x*)],
/// with u_s = K(xi_s) evaluated by exact mode summation.
inline Vec2 advance_tracer(const Vec2& x, const SpectralField& xi_t, const SpectralField& xi_next,
                           double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("advance_tracer: dt must be > 0");
    const Vec2 u0 = eval_velocity(xi_t, x);
    const Vec2 xstar = x + dt * u0;
    const Vec2 u1 = eval_velocity(xi_next, xstar);
    return x + 0.5 * dt * (u0 + u1);
}

struct TracerRunResult {
    PathRecord field_path;  // Eulerian path (with snapshots when requested)
    TracerPath tracer;
};

/// Runs the Eulerian field and the tracer in lockstep. The tracer can be
/// released after `start_step` field steps (rough initial data never sees
/// the t = 0 velocity; see the docs note on tracer start-up).
inline TracerRunResult simulate_with_tracer(SolverState& state, double T, const Vec2& x0,
                                            const SimulateOptions& opts = {},
                                            std::uint64_t start_step = 0) {
    if (T < 0.0) throw std::invalid_argument("simulate_with_tracer: T must be >= 0");
    if (state.params().kind != EquationKind::Eulerian)
        throw std::invalid_argument("simulate_with_tracer: requires an Eulerian solver");
    const double dt = state.params().dt;
    const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(T / dt));

    TracerRunResult out;
    PathRecord& rec = out.field_path;
    TracerPath& tp = out.tracer;
    tp.x0 = x0;

    Vec2 x = x0;
    Vec2 psi_prev = psi_star(state.field());
    double h1_prev = std::pow(hr_norm(state.field(), 1.0), 2);
    double lam_prev = lambda_weighted_energy(state.field(), state.params().lambda_factor);
    Vec2 disp{0.0, 0.0};
    double acc_h1 = 0.0, acc_lam = 0.0;

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
        tp.push(s.t(), x);
    };

    record(state, psi_prev, h1_prev, lam_prev);
    SpectralField prev_field = state.field();
    SpectralField noise_term(state.field().cutoff());
    for (std::uint64_t n = 0; n < nsteps; ++n) {
        state.step(opts.record_noise ? &noise_term : nullptr);
        if (opts.record_noise) rec.noise_fields.push_back(noise_term);
        if (n >= start_step) x = advance_tracer(x, prev_field, state.field(), dt);
        prev_field = state.field();
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
    return out;
}

/// Psi-map, first component: x(t) = x0 + int_0^t psi*(omega(s)) ds by
/// cumulative trapezoid over the recorded samples.
inline TracerPath lagrangian_to_trajectory(const PathRecord& omega_path, const Vec2& x0) {
    if (omega_path.psi.size() != omega_path.times.size() || omega_path.times.empty())
        throw std::invalid_argument("lagrangian_to_trajectory: psi* samples missing");
    TracerPath tp;
    tp.x0 = x0;
    Vec2 x = x0;
    tp.push(omega_path.times[0], x);
    for (std::size_t i = 1; i < omega_path.times.size(); ++i) {
        const double h = omega_path.times[i] - omega_path.times[i - 1];
        x += 0.5 * h * (omega_path.psi[i - 1] + omega_path.psi[i]);
        tp.push(omega_path.times[i], x);
    }
    return tp;
}

/// Psi-map, second component inverted: the environment seen from the tracer,
/// omega(t) = translate(xi(t), x(t)). Snapshot times must line up with the
/// tracer samples.
inline PathRecord eulerian_to_lagrangian(const PathRecord& xi_path, const TracerPath& tracer) {
    if (xi_path.fields.size() != xi_path.times.size())
        throw std::invalid_argument("eulerian_to_lagrangian: field snapshots missing");
    if (tracer.times.size() != xi_path.times.size())
        throw std::invalid_argument("eulerian_to_lagrangian: sample counts differ");
    for (std::size_t i = 0; i < tracer.times.size(); ++i)
        if (std::abs(tracer.times[i] - xi_path.times[i]) > 1e-12)
            throw std::invalid_argument("eulerian_to_lagrangian: sample times misaligned");

    PathRecord out;
    out.times = xi_path.times;
    for (std::size_t i = 0; i < xi_path.times.size(); ++i) {
        SpectralField om = translate(xi_path.fields[i], tracer.lift[i]);
        out.l2sq.push_back(std::pow(l2_norm(om), 2));
        out.h1sq.push_back(std::pow(hr_norm(om, 1.0), 2));
        out.psi.push_back(psi_star(om));
        out.fields.push_back(std::move(om));
    }
    out.final_field = out.fields.back();
    out.final_time = out.times.back();
    return out;
}

}  // namespace vortrace
