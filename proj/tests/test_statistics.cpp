#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "vortrace/config.hpp"
#include "vortrace/statistics.hpp"

using namespace vortrace;
using vortrace::testing::random_field;

TEST_CASE("kolmogorov survival function reference values", "[statistics]") {
    // classical table: Q(1.36) ~ 0.049, Q(1.63) ~ 0.010
    REQUIRE_THAT(kolmogorov_q(1.36), Catch::Matchers::WithinAbs(0.049, 0.002));
    REQUIRE_THAT(kolmogorov_q(1.63), Catch::Matchers::WithinAbs(0.010, 0.001));
    REQUIRE(kolmogorov_q(0.0) == 1.0);
}

TEST_CASE("stokes drift estimator", "[statistics]") {
    SECTION("identical straight lines give v with zero SE") {
        std::vector<Vec2> x(16, Vec2{3.0, -1.0});
        const EstimateVec2 est = stokes_drift(x, 2.0);
        REQUIRE_THAT(est.value.x, Catch::Matchers::WithinRel(1.5, 1e-14));
        REQUIRE_THAT(est.value.y, Catch::Matchers::WithinRel(-0.5, 1e-14));
        REQUIRE(est.se.x < 1e-14);
        REQUIRE(est.se.y < 1e-14);
    }
    SECTION("empty ensemble is an argument error") {
        REQUIRE_THROWS_AS(stokes_drift({}, 1.0), std::invalid_argument);
    }
}

TEST_CASE("antithetic pairs cancel the drift exactly", "[statistics]") {
    EnsembleRunParams p;
    p.mc.solver.dt = 1e-3;
    p.mc.noise = NoiseSpec::power_law(4);
    p.mc.seed = 77;
    p.w0 = SpectralField(4);
    p.T = 0.5;
    p.paths = 8;
    p.antithetic = true;
    const EnsembleRaw raw = run_displacement_ensemble(p);
    const EstimateVec2 v = stokes_drift(raw.x_final, raw.T);
    // pathwise reflection equivariance: pooled mean cancels to roundoff
    REQUIRE(std::abs(v.value.x) < 1e-14);
    REQUIRE(std::abs(v.value.y) < 1e-14);
    REQUIRE(raw.x_final[0].x == -raw.x_final[1].x);
    REQUIRE(raw.x_final[0].y == -raw.x_final[1].y);
}

TEST_CASE("direct variance estimator", "[statistics]") {
    SECTION("identical paths give the zero matrix") {
        std::vector<Vec2> x(8, Vec2{1.0, 1.0});
        const MatrixEstimate est = asymptotic_variance_direct(x, {0.0, 0.0}, 4.0);
        REQUIRE(est.value.max_abs() < 1e-14);
    }
    SECTION("standard 2D Gaussian displacements recover the identity") {
        CounterRng rng(5, 0);
        const double T = 7.0;
        std::vector<Vec2> x;
        for (int i = 0; i < 4000; ++i)
            x.push_back(Vec2{rng.next_normal(), rng.next_normal()} * std::sqrt(T));
        const MatrixEstimate est = asymptotic_variance_direct(x, {0.0, 0.0}, T);
        REQUIRE_THAT(est.value.a, Catch::Matchers::WithinAbs(1.0, 0.08));
        REQUIRE_THAT(est.value.d, Catch::Matchers::WithinAbs(1.0, 0.08));
        REQUIRE_THAT(est.value.b, Catch::Matchers::WithinAbs(0.0, 0.08));
        // CI brackets the truth
        REQUIRE(est.ci_lo.a <= 1.0);
        REQUIRE(est.ci_hi.a >= 1.0);
        REQUIRE(est.ci_lo.d <= 1.0);
        REQUIRE(est.ci_hi.d >= 1.0);
    }
}

TEST_CASE("corrector nested Monte Carlo", "[statistics]") {
    SECTION("psi-null deterministic start with centered v stays zero") {
        // real-coefficient field: psi* = 0 along the whole deterministic path
        SpectralField w(3);
        w.set({1, 0}, Complex{0.7, 0.0});
        w.set({1, 1}, Complex{-0.4, 0.0});
        McSetup mc;
        mc.solver.dt = 1e-3;
        mc.solver.nonlinearity = false;
        mc.noise = NoiseSpec::power_law(3);
        CorrectorSettings cs;
        cs.t = 0.5;
        cs.inner = 4;
        // zero noise realization via playback of zeros
        SolverParams params = mc.solver;
        params.kind = EquationKind::Lagrangian;
        SolverState state(params, w, mc.noise, std::make_shared<ZeroNoiseSource>());
        const auto d = psi_integral(state, 0.25, 0.5);
        REQUIRE(d.second.norm() == 0.0);
    }
    SECTION("linear dynamics match the closed form") {
        const SpectralField w = make_named_field("mix", 4);
        McSetup mc;
        mc.solver.dt = 1e-2;
        mc.solver.nonlinearity = false;
        mc.noise = NoiseSpec::power_law(4);
        mc.seed = 11;
        CorrectorSettings cs;
        cs.t = 0.5;  // >= 5 / lambda_min = 0.127
        cs.inner = 1024;
        const CorrectorEstimate est = corrector(w, mc, cs);
        const Vec2 want = corrector_exact_linear(w);
        INFO("chi = (" << est.value.x << "," << est.value.y << "), want (" << want.x << ","
                       << want.y << "), se (" << est.se.x << "," << est.se.y << ")");
        REQUIRE(std::abs(est.value.x - want.x) < 4.0 * est.se.x + 0.01 * std::abs(want.x));
        REQUIRE(std::abs(est.value.y - want.y) < 4.0 * est.se.y + 0.01 * std::abs(want.y));
    }
    SECTION("deterministic nonlinear tails decrease geometrically") {
        const SpectralField w = make_named_field("mix", 4);
        McSetup mc;
        mc.solver.dt = 1e-3;
        mc.noise = NoiseSpec::power_law(4);
        CorrectorSettings cs;
        cs.inner = 1;
        auto chi_det = [&](double t) {
            SolverParams params = mc.solver;
            params.kind = EquationKind::Lagrangian;
            SolverState state(params, w, mc.noise, std::make_shared<ZeroNoiseSource>());
            return psi_integral(state, 0.5 * t, t);
        };
        const auto a = chi_det(0.2);
        const auto b = chi_det(0.4);
        const double tail_a = (a.second - a.first).norm();   // chi_0.2 - chi_0.1
        const double tail_b = (b.second - b.first).norm();   // chi_0.4 - chi_0.2
        REQUIRE(tail_b < 0.25 * tail_a);
    }
}

TEST_CASE("Green-Kubo estimator matches the linear closed form", "[statistics]") {
    McSetup mc;
    mc.solver.dt = 1e-2;
    mc.solver.nonlinearity = false;
    mc.noise = NoiseSpec::power_law(3);
    mc.seed = 21;
    const auto samples = sample_stationary(SpectralField(3), mc, 5.0, 0.25, 512);
    CorrectorSettings cs;
    cs.t = 0.6;
    cs.inner = 8;
    const GreenKuboData data = green_kubo_collect(samples, mc, cs);
    const MatrixEstimate est = green_kubo_D(data, {0.0, 0.0}, {0.0, 0.0});
    const Mat2 want = green_kubo_exact_linear(mc.noise);
    INFO("D_hat = [" << est.value.a << "," << est.value.b << ";" << est.value.c << ","
                     << est.value.d << "]  want [" << want.a << "," << want.b << ";" << want.c
                     << "," << want.d << "]");
    REQUIRE_THAT(est.value.a, Catch::Matchers::WithinRel(want.a, 0.2));
    REQUIRE_THAT(est.value.d, Catch::Matchers::WithinRel(want.d, 0.2));
    REQUIRE(std::abs(est.value.b) < 0.2 * want.a);
    // symmetric by construction
    REQUIRE(est.value.b == est.value.c);
    // CI brackets the closed form
    REQUIRE(est.ci_lo.a <= want.a);
    REQUIRE(est.ci_hi.a >= want.a);
}

TEST_CASE("martingale parts", "[statistics]") {
    SECTION("T = 0 gives M = 0 and R = 0") {
        const MartingaleParts mp = martingale_parts({0.3, 0.4}, {0.3, 0.4}, {0.0, 0.0}, 0.0);
        REQUIRE(mp.m.norm() == 0.0);
        REQUIRE(mp.r.norm() == 0.0);
    }
    SECTION("linear dynamics with the exact corrector give uncorrelated increments") {
        McSetup mc;
        mc.solver.dt = 1e-2;
        mc.solver.nonlinearity = false;
        mc.noise = NoiseSpec::power_law(3);
        SolverParams params = mc.solver;
        params.kind = EquationKind::Lagrangian;
        SolverState state(params, SpectralField(3), mc.noise, 31, 0);
        const int blocks = 400;
        const double block_t = 1.0;
        std::vector<double> mx;
        Vec2 m_prev{0.0, 0.0};
        Vec2 chi_prev = corrector_exact_linear(state.field());
        Vec2 disp{0.0, 0.0};
        Vec2 psi_prev = psi_star(state.field());
        for (int b = 0; b < blocks; ++b) {
            const std::uint64_t steps = static_cast<std::uint64_t>(std::llround(block_t / params.dt));
            for (std::uint64_t n = 0; n < steps; ++n) {
                state.step();
                const Vec2 cur = psi_star(state.field());
                disp += 0.5 * params.dt * (psi_prev + cur);
                psi_prev = cur;
            }
            const Vec2 chi_now = corrector_exact_linear(state.field());
            const Vec2 m_now = chi_now - chi_prev + disp;  // cumulative martingale
            mx.push_back(m_now.x - m_prev.x);
            m_prev = m_now;
            // keep chi_prev at the initial field: M_T uses endpoints only
        }
        for (std::size_t lag = 1; lag <= 3; ++lag) {
            const double rho = autocorrelation(mx, lag);
            INFO("lag " << lag << " autocorrelation " << rho);
            REQUIRE(std::abs(rho) < 3.0 / std::sqrt(static_cast<double>(mx.size())));
        }
    }
    SECTION("E|R_T| decreases in T") {
        McSetup mc;
        mc.solver.dt = 1e-2;
        mc.solver.nonlinearity = false;
        mc.noise = NoiseSpec::power_law(3);
        SolverParams params = mc.solver;
        params.kind = EquationKind::Lagrangian;
        const int paths = 48;
        double r_small = 0.0, r_large = 0.0;
        for (int j = 0; j < paths; ++j) {
            SolverState state(params, SpectralField(3), mc.noise, 55,
                              static_cast<std::uint64_t>(j));
            const Vec2 chi0 = corrector_exact_linear(state.field());
            const std::uint64_t n_small = 400, n_large = 6400;
            for (std::uint64_t n = 0; n < n_small; ++n) state.step();
            r_small += (chi0 - corrector_exact_linear(state.field())).norm() / std::sqrt(4.0);
            for (std::uint64_t n = n_small; n < n_large; ++n) state.step();
            r_large += (chi0 - corrector_exact_linear(state.field())).norm() / std::sqrt(64.0);
        }
        REQUIRE(r_large < r_small);
    }
}

TEST_CASE("clt diagnostics", "[statistics]") {
    SECTION("exact normal samples pass in at least 98% of meta-trials") {
        CounterRng rng(61, 0);
        int passes = 0;
        const int trials = 200;
        for (int t = 0; t < trials; ++t) {
            std::vector<Vec2> z;
            for (int i = 0; i < 256; ++i) z.push_back({rng.next_normal(), rng.next_normal()});
            const CltReport rep = clt_diagnostics(z, covariance(z).sym(), 0.01);
            if (rep.pass) ++passes;
        }
        INFO("passes = " << passes << "/" << trials);
        REQUIRE(passes >= 196);
    }
    SECTION("constant inputs raise the degenerate flag") {
        std::vector<Vec2> z(128, Vec2{1.0, -2.0});
        const CltReport rep = clt_diagnostics(z, covariance(z).sym(), 0.01);
        REQUIRE(rep.degenerate);
        REQUIRE(!rep.pass);
    }
    SECTION("whitened moments sit near the normal reference") {
        CounterRng rng(62, 0);
        std::vector<Vec2> z;
        for (int i = 0; i < 4096; ++i) z.push_back({rng.next_normal(), rng.next_normal()});
        const CltReport rep = clt_diagnostics(z, covariance(z).sym(), 0.01);
        REQUIRE_THAT(rep.mardia_kurtosis, Catch::Matchers::WithinAbs(8.0, 0.5));
        REQUIRE(rep.mardia_skewness < 0.1);
    }
}

TEST_CASE("moment monitors", "[statistics]") {
    SECTION("decaying run: zero balance ratio, bounded moments") {
        SolverParams p;
        p.kind = EquationKind::Lagrangian;
        p.dt = 1e-3;
        SolverState s(p, make_named_field("mix", 3), NoiseSpec::zero(3), 1, 0);
        const PathRecord rec = simulate(s, 2.0, SimulateOptions{100, false, false});
        const MomentReport rep = moment_monitors(rec, NoiseSpec::zero(3), 0.25);
        REQUIRE(rep.balance_ratio == 0.0);
        REQUIRE(rep.exp_moment_bounded);
        REQUIRE(rep.v_norm_moments[1] < std::pow(hr_norm(make_named_field("mix", 3), 1.0), 2));
    }
    SECTION("linear run: balance ratio near one") {
        SolverParams p;
        p.kind = EquationKind::Lagrangian;
        p.dt = 1e-2;
        p.nonlinearity = false;
        const NoiseSpec q = NoiseSpec::power_law(3);
        SolverState s(p, SpectralField(3), q, 7, 0);
        const PathRecord rec = simulate(s, 500.0, SimulateOptions{100, false, false});
        const MomentReport rep = moment_monitors(rec, q);
        INFO("balance ratio = " << rep.balance_ratio);
        REQUIRE_THAT(rep.balance_ratio, Catch::Matchers::WithinAbs(1.0, 0.03));
        REQUIRE(rep.exp_moment_bounded);
    }
    SECTION("nonlinear run: balance ratio near one (energy-neutral advection)") {
        SolverParams p;
        p.kind = EquationKind::Lagrangian;
        p.dt = 1e-3;
        const NoiseSpec q = NoiseSpec::power_law(4);
        SolverState s(p, SpectralField(4), q, 9, 0);
        const PathRecord rec = simulate(s, 60.0, SimulateOptions{100, false, false});
        const MomentReport rep = moment_monitors(rec, q);
        INFO("balance ratio = " << rep.balance_ratio);
        REQUIRE_THAT(rep.balance_ratio, Catch::Matchers::WithinAbs(1.0, 0.15));
    }
}

TEST_CASE("stationary mean of psi* vanishes within error", "[statistics]") {
    SolverParams p;
    p.kind = EquationKind::Lagrangian;
    p.dt = 1e-2;
    p.nonlinearity = false;
    const NoiseSpec q = NoiseSpec::power_law(3);
    SolverState s(p, SpectralField(3), q, 13, 0);
    for (int n = 0; n < 2000; ++n) s.step();  // burn-in 20 units
    const int blocks = 64;
    std::vector<double> bx(blocks), by(blocks);
    for (int b = 0; b < blocks; ++b) {
        Vec2 acc{0.0, 0.0};
        for (int n = 0; n < 200; ++n) {
            s.step();
            acc += psi_star(s.field());
        }
        bx[b] = acc.x / 200.0;
        by[b] = acc.y / 200.0;
    }
    REQUIRE(std::abs(mean(bx)) <= 3.5 * jackknife_se_mean(bx) + 1e-12);
    REQUIRE(std::abs(mean(by)) <= 3.5 * jackknife_se_mean(by) + 1e-12);
}

TEST_CASE("displacement is bounded by the enstrophy integral", "[statistics]") {
    SolverParams p;
    p.kind = EquationKind::Lagrangian;
    p.dt = 1e-3;
    const NoiseSpec q = NoiseSpec::power_law(4);
    SolverState s(p, SpectralField(4), q, 17, 0);
    const PathRecord rec = simulate(s, 5.0, SimulateOptions{1, false, false});
    const double c = psi_star_bound_constant(4);
    double int_vnorm = 0.0;
    for (std::size_t i = 1; i < rec.samples(); ++i) {
        const double h = rec.times[i] - rec.times[i - 1];
        int_vnorm += 0.5 * h * (std::sqrt(rec.h1sq[i - 1]) + std::sqrt(rec.h1sq[i]));
        REQUIRE(rec.displacement[i].norm() <= c * int_vnorm + 1e-12);
    }
}

TEST_CASE("standard errors shrink like 1/sqrt(2) under ensemble doubling", "[statistics]") {
    EnsembleRunParams p;
    p.mc.solver.dt = 1e-2;
    p.mc.solver.nonlinearity = false;
    p.mc.noise = NoiseSpec::power_law(3);
    p.mc.seed = 23;
    p.w0 = SpectralField(3);
    p.T = 20.0;
    p.paths = 64;
    const EnsembleRaw raw64 = run_displacement_ensemble(p);
    p.paths = 128;
    const EnsembleRaw raw128 = run_displacement_ensemble(p);
    const double se64 = stokes_drift(raw64.x_final, p.T).se.x;
    const double se128 = stokes_drift(raw128.x_final, p.T).se.x;
    INFO("se64 = " << se64 << ", se128 = " << se128);
    REQUIRE(se128 / se64 < 1.0);
    REQUIRE(se128 / se64 > 0.45);
}
