#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vortrace/dynamics.hpp"
#include "vortrace/stats.hpp"
#include "vortrace/tracer.hpp"

namespace vortrace {

struct EstimateVec2 {
    Vec2 value{0.0, 0.0};
    Vec2 se{0.0, 0.0};
};

struct MatrixEstimate {
    Mat2 value = Mat2::zero();
    Mat2 ci_lo = Mat2::zero();  // 95% CI per entry
    Mat2 ci_hi = Mat2::zero();
};

/// Stokes drift estimate: componentwise mean of x(T)/T with jackknife SE.
inline EstimateVec2 stokes_drift(const std::vector<Vec2>& x_final, double T) {
    if (x_final.empty()) throw std::invalid_argument("stokes_drift: empty ensemble");
    if (!(T > 0.0)) throw std::invalid_argument("stokes_drift: T must be > 0");
    std::vector<double> vx, vy;
    vx.reserve(x_final.size());
    vy.reserve(x_final.size());
    for (const auto& x : x_final) {
        vx.push_back(x.x / T);
        vy.push_back(x.y / T);
    }
    EstimateVec2 out;
    out.value = {mean(vx), mean(vy)};
    if (x_final.size() >= 2) out.se = {jackknife_se_mean(vx), jackknife_se_mean(vy)};
    return out;
}

/// Direct asymptotic variance: sample covariance of Z = (x(T) - vT)/sqrt(T)
/// with percentile-bootstrap CIs per entry.
inline MatrixEstimate asymptotic_variance_direct(const std::vector<Vec2>& x_final, const Vec2& v,
                                                 double T, std::uint64_t boot_seed = 0x9e3779b9,
                                                 int resamples = 1000) {
    if (x_final.size() < 2) throw std::invalid_argument("asymptotic_variance_direct: need >= 2 paths");
    const double rt = std::sqrt(T);
    std::vector<Vec2> z;
    z.reserve(x_final.size());
    for (const auto& x : x_final) z.push_back((x - v * T) / rt);
    MatrixEstimate out;
    out.value = covariance(z).sym();
    const std::size_t n = z.size();
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            auto stat = [&](const std::vector<std::size_t>& idx) {
                Vec2 m{0.0, 0.0};
                for (auto s : idx) m += z[s];
                m = m / static_cast<double>(idx.size());
                double acc = 0.0;
                for (auto s : idx) {
                    const Vec2 d = z[s] - m;
                    acc += (i == 0 ? d.x : d.y) * (j == 0 ? d.x : d.y);
                }
                return acc / static_cast<double>(idx.size() - 1);
            };
            const auto ci =
                bootstrap_ci(n, stat, resamples, 0.95, boot_seed, 101 + 2 * i + j);
            out.ci_lo.at(i, j) = ci.first;
            out.ci_hi.at(i, j) = ci.second;
            out.ci_lo.at(j, i) = ci.first;
            out.ci_hi.at(j, i) = ci.second;
        }
    }
    return out;
}

/// Run parameters shared by the Monte Carlo estimators.
struct McSetup {
    SolverParams solver;  // kind is forced to Lagrangian by the drivers
    NoiseSpec noise;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

/// Lean trajectory kernel: advances a Lagrangian path from w and returns the
/// trapezoid integrals of psi* at t_half and t_full (used by the corrector
/// and ensemble drivers; avoids the full PathRecord observable set).
inline std::pair<Vec2, Vec2> psi_integral(SolverState& state, double t_half, double t_full) {
    const double dt = state.params().dt;
    const std::uint64_t n_half = static_cast<std::uint64_t>(std::llround(t_half / dt));
    const std::uint64_t n_full = static_cast<std::uint64_t>(std::llround(t_full / dt));
    Vec2 disp{0.0, 0.0}, disp_half{0.0, 0.0};
    Vec2 prev = psi_star(state.field());
    for (std::uint64_t n = 0; n < n_full; ++n) {
        state.step();
        const Vec2 cur = psi_star(state.field());
        disp += 0.5 * dt * (prev + cur);
        prev = cur;
        if (n + 1 == n_half) disp_half = disp;
    }
    return {disp_half, disp};
}

/// chi_t(w) estimate by nested Monte Carlo: average over inner independent
/// Lagrangian runs from w of int_0^t (psi*(omega(s)) - v*) ds. Raw
/// (uncentered) integrals are kept so the centering v can be re-applied
/// algebraically.
struct CorrectorSettings {
    double t = 2.0;
    int inner = 32;
    Vec2 v_star{0.0, 0.0};
    std::uint64_t stream_base = 1u << 24;
};

struct CorrectorEstimate {
    Vec2 value{0.0, 0.0};      // chi_t estimate (centered by v_star)
    Vec2 value_half{0.0, 0.0}; // chi_{t/2}
    Vec2 tail{0.0, 0.0};       // chi_t - chi_{t/2}
    Vec2 se{0.0, 0.0};
    Vec2 raw{0.0, 0.0};        // uncentered mean of int psi ds
    Vec2 raw_half{0.0, 0.0};
    double t = 0.0;
    int inner = 0;
};

inline CorrectorEstimate corrector(const SpectralField& w, const McSetup& mc,
                                   const CorrectorSettings& cs) {
    if (cs.inner < 1) throw std::invalid_argument("corrector: inner ensemble must be >= 1");
    SolverParams params = mc.solver;
    params.kind = EquationKind::Lagrangian;
    std::vector<Vec2> raw(static_cast<std::size_t>(cs.inner));
    std::vector<Vec2> raw_half(static_cast<std::size_t>(cs.inner));
    parallel_for(
        static_cast<std::size_t>(cs.inner),
        [&](std::size_t j) {
            SolverState state(params, w, mc.noise, mc.seed, cs.stream_base + j);
            const auto d = psi_integral(state, 0.5 * cs.t, cs.t);
            raw_half[j] = d.first;
            raw[j] = d.second;
        },
        mc.threads);
    CorrectorEstimate est;
    est.t = cs.t;
    est.inner = cs.inner;
    std::vector<double> cx, cy;
    for (int j = 0; j < cs.inner; ++j) {
        est.raw += raw[static_cast<std::size_t>(j)];
        est.raw_half += raw_half[static_cast<std::size_t>(j)];
        cx.push_back(raw[static_cast<std::size_t>(j)].x);
        cy.push_back(raw[static_cast<std::size_t>(j)].y);
    }
    est.raw = est.raw / static_cast<double>(cs.inner);
    est.raw_half = est.raw_half / static_cast<double>(cs.inner);
    est.value = est.raw - cs.v_star * cs.t;
    est.value_half = est.raw_half - cs.v_star * (0.5 * cs.t);
    est.tail = est.value - est.value_half;
    if (cs.inner >= 2) est.se = {jackknife_se_mean(cx), jackknife_se_mean(cy)};
    return est;
}

/// Exact corrector of the linear (B = 0) dynamics:
/// chi(w) = sum_k a_k w_k / lambda_k with a_k the psi* coefficient vector.
inline Vec2 corrector_exact_linear(const SpectralField& w, double lambda_factor = kFourPiSq) {
    double ux = 0.0, uy = 0.0;
    for (std::size_t i = 0; i < w.mode_count(); ++i) {
        const Wavevector& k = w.table()[i];
        const double lambda = lambda_factor * k.norm2();
        const double f = w[i].imag() / (kPi * k.norm2()) / lambda;
        ux += k.k2 * f;
        uy += -k.k1 * f;
    }
    return {ux, uy};
}

/// Closed-form Green-Kubo matrix of the linear dynamics:
/// D_ij = 2 sum_k Re(a_k^i conj(a_k^j)) sigma_k^2 / lambda_k,
/// sigma_k^2 = q_k^2/(2 lambda_k) the stationary mode variance.
inline Mat2 green_kubo_exact_linear(const NoiseSpec& noise, double lambda_factor = kFourPiSq) {
    const ModeTable table(noise.cutoff());
    Mat2 d = Mat2::zero();
    for (std::size_t i = 0; i < table.size(); ++i) {
        const Wavevector& k = table[i];
        const double lambda = lambda_factor * k.norm2();
        const double sigma2 = noise.q(i) * noise.q(i) / (2.0 * lambda);
        // a_k = (-i/(2 pi |k|^2)) (k2, -k1); Re(a^i conj(a^j)) = k^perp_i k^perp_j / (2 pi |k|^2)^2
        const double c = 1.0 / (kTwoPi * k.norm2() * kTwoPi * k.norm2());
        const double w = 2.0 * sigma2 / lambda * c * 2.0;  // both half-lattices
        d.a += w * (k.k2 * k.k2);
        d.b += w * (k.k2 * -k.k1);
        d.d += w * (k.k1 * k.k1);
    }
    d.c = d.b;
    return d;
}

/// Stationary samples w ~ mu_* from one long Lagrangian run: burn-in, then
/// snapshots every `thinning` time units.
inline std::vector<SpectralField> sample_stationary(const SpectralField& w0, const McSetup& mc,
                                                    double burn_in, double thinning, int count,
                                                    std::uint64_t stream = 7) {
    SolverParams params = mc.solver;
    params.kind = EquationKind::Lagrangian;
    SolverState state(params, w0, mc.noise, mc.seed, stream);
    const double dt = params.dt;
    const std::uint64_t burn_steps = static_cast<std::uint64_t>(std::llround(burn_in / dt));
    const std::uint64_t thin_steps =
        std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(thinning / dt)));
    for (std::uint64_t n = 0; n < burn_steps; ++n) state.step();
    std::vector<SpectralField> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        for (std::uint64_t n = 0; n < thin_steps; ++n) state.step();
        samples.push_back(state.field());
    }
    return samples;
}

/// Green-Kubo estimator state: per stationary sample, psi*(w) and the raw
/// corrector integrals, so D(v) is an algebraic function of the centering.
struct GreenKuboData {
    std::vector<Vec2> psi_raw;
    std::vector<Vec2> chi_raw;       // uncentered chi integrals at horizon t
    std::vector<Vec2> chi_raw_half;  // at t/2
    double t = 0.0;

    Mat2 evaluate(const Vec2& v) const {
        Mat2 acc = Mat2::zero();
        for (std::size_t s = 0; s < psi_raw.size(); ++s) {
            const Vec2 psi = psi_raw[s] - v;
            const Vec2 chi = chi_raw[s] - v * t;
            acc.a += 2.0 * psi.x * chi.x;
            acc.b += psi.x * chi.y + psi.y * chi.x;
            acc.d += 2.0 * psi.y * chi.y;
        }
        acc.c = acc.b;
        return acc * (1.0 / static_cast<double>(psi_raw.size()));
    }

    /// Tail proxy: mean |chi_t - chi_{t/2}| (should shrink as t grows).
    double tail_norm(const Vec2& v) const {
        double acc = 0.0;
        for (std::size_t s = 0; s < psi_raw.size(); ++s)
            acc += ((chi_raw[s] - v * t) - (chi_raw_half[s] - v * (0.5 * t))).norm();
        return acc / static_cast<double>(psi_raw.size());
    }
};

inline GreenKuboData green_kubo_collect(const std::vector<SpectralField>& samples,
                                        const McSetup& mc, const CorrectorSettings& cs) {
    GreenKuboData data;
    data.t = cs.t;
    data.psi_raw.resize(samples.size());
    data.chi_raw.resize(samples.size());
    data.chi_raw_half.resize(samples.size());
    SolverParams params = mc.solver;
    params.kind = EquationKind::Lagrangian;
    parallel_for(
        samples.size(),
        [&](std::size_t s) {
            data.psi_raw[s] = psi_star(samples[s]);
            Vec2 acc{0.0, 0.0}, acc_half{0.0, 0.0};
            for (int j = 0; j < cs.inner; ++j) {
                SolverState state(params, samples[s], mc.noise, mc.seed,
                                  cs.stream_base + s * static_cast<std::uint64_t>(cs.inner) + j);
                const auto d = psi_integral(state, 0.5 * cs.t, cs.t);
                acc_half += d.first;
                acc += d.second;
            }
            data.chi_raw[s] = acc / static_cast<double>(cs.inner);
            data.chi_raw_half[s] = acc_half / static_cast<double>(cs.inner);
        },
        mc.threads);
    return data;
}

/// Green-Kubo D with bootstrap CIs over the stationary samples, widened by
/// the centering sensitivity over v in v_hat +/- se (propagating the pooled
/// drift estimate's uncertainty).
inline MatrixEstimate green_kubo_D(const GreenKuboData& data, const Vec2& v, const Vec2& v_se,
                                   std::uint64_t boot_seed = 0xabcdef, int resamples = 500) {
    const std::size_t n = data.psi_raw.size();
    if (n < 2) throw std::invalid_argument("green_kubo_D: need >= 2 stationary samples");
    MatrixEstimate out;
    out.value = data.evaluate(v);
    for (int i = 0; i < 2; ++i) {
        for (int j = i; j < 2; ++j) {
            auto stat = [&](const std::vector<std::size_t>& idx) {
                double acc = 0.0;
                for (auto s : idx) {
                    const Vec2 psi = data.psi_raw[s] - v;
                    const Vec2 chi = data.chi_raw[s] - v * data.t;
                    const double pi_ = i == 0 ? psi.x : psi.y;
                    const double pj_ = j == 0 ? psi.x : psi.y;
                    const double ci_ = i == 0 ? chi.x : chi.y;
                    const double cj_ = j == 0 ? chi.x : chi.y;
                    acc += pi_ * cj_ + pj_ * ci_;
                }
                return acc / static_cast<double>(idx.size());
            };
            const auto ci = bootstrap_ci(n, stat, resamples, 0.95, boot_seed, 211 + 2 * i + j);
            out.ci_lo.at(i, j) = ci.first;
            out.ci_hi.at(i, j) = ci.second;
            out.ci_lo.at(j, i) = ci.first;
            out.ci_hi.at(j, i) = ci.second;
        }
    }
    // centering sensitivity: widen by the range of D(v') - D(v) over the
    // corners of v +/- se
    Mat2 delta_lo = Mat2::zero(), delta_hi = Mat2::zero();
    for (double sx : {-1.0, 1.0}) {
        for (double sy : {-1.0, 1.0}) {
            const Mat2 shifted = data.evaluate({v.x + sx * v_se.x, v.y + sy * v_se.y});
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const double d = shifted(i, j) - out.value(i, j);
                    delta_lo.at(i, j) = std::min(delta_lo.at(i, j), d);
                    delta_hi.at(i, j) = std::max(delta_hi.at(i, j), d);
                }
        }
    }
    out.ci_lo = out.ci_lo + delta_lo;
    out.ci_hi = out.ci_hi + delta_hi;
    return out;
}

/// Martingale decomposition pieces at horizon T:
///   M_T = chi(omega(T)) - chi(omega(0)) + int_0^T (psi* - v) ds
///   R_T = (chi(omega(0)) - chi(omega(T))) / sqrt(T)  (0 at T = 0).
struct MartingaleParts {
    Vec2 m{0.0, 0.0};
    Vec2 r{0.0, 0.0};
};

inline MartingaleParts martingale_parts(const Vec2& chi_start, const Vec2& chi_end,
                                        const Vec2& integral_psi_tilde, double T) {
    MartingaleParts out;
    out.m = chi_end - chi_start + integral_psi_tilde;
    if (T > 0.0) out.r = (chi_start - chi_end) / std::sqrt(T);
    return out;
}

struct CltReport {
    KsResult ks_x;
    KsResult ks_y;
    double mardia_skewness = 0.0;
    double mardia_kurtosis = 0.0;  // 8 for the 2D standard normal
    bool degenerate = false;       // whitening hit the eigenvalue floor
    bool pass = false;
    double alpha = 0.01;
};

/// Whitens Z by D^{-1/2} (eigenvalue floor 1e-12 * trace, flagged) and runs
/// per-component KS against the standard normal plus Mardia moments.
inline CltReport clt_diagnostics(const std::vector<Vec2>& z, const Mat2& d_hat,
                                 double alpha = 0.01) {
    if (z.size() < 100) throw std::invalid_argument("clt_diagnostics: need >= 100 samples");
    CltReport rep;
    rep.alpha = alpha;
    Mat2 white;
    rep.degenerate = !inv_sym_sqrt(d_hat.sym(), 1e-12 * std::max(d_hat.trace(), 1e-300), white);
    std::vector<Vec2> zw;
    zw.reserve(z.size());
    Vec2 m{0.0, 0.0};
    for (const auto& v : z) m += v;
    m = m / static_cast<double>(z.size());
    for (const auto& v : z) zw.push_back(white * (v - m));
    std::vector<double> xs, ys;
    for (const auto& v : zw) {
        xs.push_back(v.x);
        ys.push_back(v.y);
    }
    rep.ks_x = ks_test_standard_normal(xs);
    rep.ks_y = ks_test_standard_normal(ys);
    const auto mardia = mardia_moments(zw);
    rep.mardia_skewness = mardia.first;
    rep.mardia_kurtosis = mardia.second;
    rep.pass = !rep.degenerate && rep.ks_x.p_value >= alpha && rep.ks_y.p_value >= alpha;
    return rep;
}

struct MomentReport {
    double balance_ratio = 0.0;       // time-avg of 2 sum lambda_k |w_k|^2 over trQ^2
    double nu = 0.0;                  // exponent used for the e_nu monitor
    double exp_moment_max = 0.0;      // max over samples of exp(nu |w|^2)
    double exp_moment_first_half = 0.0;
    double exp_moment_second_half = 0.0;
    bool exp_moment_bounded = false;
    std::array<double, 3> v_norm_moments{0.0, 0.0, 0.0};  // time-avg ||w||^N, N = 1, 2, 4
};

/// Appendix-style monitors over a recorded path: stationary energy balance
/// (2 E sum lambda_k|w_k|^2 = trQ^2), the exponential moment e_nu, and
/// stationary moments of ||w||^N.
inline MomentReport moment_monitors(const PathRecord& path, const NoiseSpec& noise,
                                    double nu = 0.0) {
    if (path.times.size() < 2 || path.int_lambda_sq.empty())
        throw std::invalid_argument("moment_monitors: path must record dissipation integrals");
    MomentReport rep;
    const double T = path.times.back() - path.times.front();
    const double trq2 = noise.tr_q2();
    rep.balance_ratio = trq2 > 0.0 && T > 0.0
                            ? 2.0 * (path.int_lambda_sq.back() - path.int_lambda_sq.front()) /
                                  (T * trq2)
                            : 0.0;
    rep.nu = nu > 0.0 ? nu : (noise.operator_norm() > 0.0 ? 0.25 / noise.operator_norm() : 0.25);
    double first = 0.0, second = 0.0;
    std::size_t nfirst = 0, nsecond = 0;
    for (std::size_t i = 0; i < path.times.size(); ++i) {
        const double e = std::exp(rep.nu * path.l2sq[i]);
        rep.exp_moment_max = std::max(rep.exp_moment_max, e);
        if (path.times[i] <= path.times.front() + 0.5 * T) {
            first += e;
            ++nfirst;
        } else {
            second += e;
            ++nsecond;
        }
        const double vn = std::sqrt(path.h1sq[i]);
        rep.v_norm_moments[0] += vn;
        rep.v_norm_moments[1] += vn * vn;
        rep.v_norm_moments[2] += vn * vn * vn * vn;
    }
    for (auto& v : rep.v_norm_moments) v /= static_cast<double>(path.times.size());
    rep.exp_moment_first_half = nfirst ? first / static_cast<double>(nfirst) : 0.0;
    rep.exp_moment_second_half = nsecond ? second / static_cast<double>(nsecond) : 0.0;
    rep.exp_moment_bounded = std::isfinite(rep.exp_moment_max) &&
                             rep.exp_moment_second_half <= 2.0 * rep.exp_moment_first_half +
                                                               1e-12;
    return rep;
}

/// Displacement ensemble: K Lagrangian paths from w0, each contributing the
/// additive-functional tracer displacement x(T) = int_0^T psi*(omega) ds
/// (plus the T/2 value), run trajectory-parallel with stream = path index
/// and merged in index order. With antithetic = true, odd paths replay the
/// conjugated (point-reflected) noise of the preceding even path.
struct EnsembleRunParams {
    McSetup mc;
    SpectralField w0;
    double T = 100.0;
    int paths = 128;
    bool antithetic = false;
};

struct EnsembleRaw {
    std::vector<Vec2> x_final;
    std::vector<Vec2> x_half;
    double T = 0.0;
    double int_lambda_sq_mean = 0.0;  // ensemble mean of the dissipation integral
    double l2sq_final_mean = 0.0;
};

inline EnsembleRaw run_displacement_ensemble(const EnsembleRunParams& p) {
    if (p.paths < 1) throw std::invalid_argument("run_displacement_ensemble: paths must be >= 1");
    EnsembleRaw raw;
    raw.T = p.T;
    raw.x_final.resize(static_cast<std::size_t>(p.paths));
    raw.x_half.resize(static_cast<std::size_t>(p.paths));
    std::vector<double> int_lam(static_cast<std::size_t>(p.paths), 0.0);
    std::vector<double> l2f(static_cast<std::size_t>(p.paths), 0.0);
    SolverParams params = p.mc.solver;
    params.kind = EquationKind::Lagrangian;
    parallel_for(
        static_cast<std::size_t>(p.paths),
        [&](std::size_t j) {
            std::shared_ptr<NoiseSource> src;
            if (p.antithetic) {
                const std::uint64_t pair = j / 2;
                auto base = std::make_shared<RngNoiseSource>(p.mc.seed, pair);
                if (j % 2 == 1)
                    src = std::make_shared<ConjugateNoiseSource>(base);
                else
                    src = base;
            } else {
                src = std::make_shared<RngNoiseSource>(p.mc.seed, j);
            }
            SolverState state(params, p.w0, p.mc.noise, src);
            const double dt = params.dt;
            const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(p.T / dt));
            const std::uint64_t half = nsteps / 2;
            Vec2 disp{0.0, 0.0};
            Vec2 prev = psi_star(state.field());
            double lam_prev =
                lambda_weighted_energy(state.field(), params.lambda_factor);
            double acc_lam = 0.0;
            for (std::uint64_t n = 0; n < nsteps; ++n) {
                state.step();
                const Vec2 cur = psi_star(state.field());
                disp += 0.5 * dt * (prev + cur);
                prev = cur;
                const double lam =
                    lambda_weighted_energy(state.field(), params.lambda_factor);
                acc_lam += 0.5 * dt * (lam_prev + lam);
                lam_prev = lam;
                if (n + 1 == half) raw.x_half[j] = disp;
            }
            raw.x_final[j] = disp;
            int_lam[j] = acc_lam;
            l2f[j] = std::pow(l2_norm(state.field()), 2);
        },
        p.mc.threads);
    raw.int_lambda_sq_mean = mean(int_lam);
    raw.l2sq_final_mean = mean(l2f);
    return raw;
}

/// Estimator outputs for one ensemble run (LLN / variance / CLT pipeline).
struct EnsembleSummary {
    int paths = 0;
    double T = 0.0;
    EstimateVec2 v_hat;
    MatrixEstimate d_direct;
    CltReport clt;
    double rms_half = 0.0;   // RMS of |x(T/2)/(T/2)|
    double rms_final = 0.0;  // RMS of |x(T)/T|
};

inline EnsembleSummary summarize_ensemble(const EnsembleRaw& raw, double clt_alpha = 0.01,
                                          int clt_paths_cap = 0) {
    EnsembleSummary s;
    s.paths = static_cast<int>(raw.x_final.size());
    s.T = raw.T;
    s.v_hat = stokes_drift(raw.x_final, raw.T);
    s.d_direct = asymptotic_variance_direct(raw.x_final, s.v_hat.value, raw.T);
    std::vector<Vec2> z;
    const std::size_t nclt = clt_paths_cap > 0
                                 ? std::min<std::size_t>(raw.x_final.size(),
                                                         static_cast<std::size_t>(clt_paths_cap))
                                 : raw.x_final.size();
    const double rt = std::sqrt(raw.T);
    for (std::size_t i = 0; i < nclt; ++i)
        z.push_back((raw.x_final[i] - s.v_hat.value * raw.T) / rt);
    s.clt = clt_diagnostics(z, covariance(z).sym(), clt_alpha);
    double acc_h = 0.0, acc_f = 0.0;
    const double t_half = 0.5 * raw.T;
    for (std::size_t i = 0; i < raw.x_final.size(); ++i) {
        const Vec2 vh = raw.x_half[i] / t_half;
        const Vec2 vf = raw.x_final[i] / raw.T;
        acc_h += vh.dot(vh);
        acc_f += vf.dot(vf);
    }
    s.rms_half = std::sqrt(acc_h / static_cast<double>(raw.x_final.size()));
    s.rms_final = std::sqrt(acc_f / static_cast<double>(raw.x_final.size()));
    return s;
}

}  // namespace vortrace
