#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "vortrace/config.hpp"
#include "vortrace/dynamics.hpp"
#include "vortrace/stats.hpp"

using namespace vortrace;
using vortrace::testing::random_field;

static SolverParams lagrangian_params(double dt = 1e-3) {
    SolverParams p;
    p.kind = EquationKind::Lagrangian;
    p.dt = dt;
    return p;
}

TEST_CASE("single cosine mode decays exactly (nonlinearity vanishes)", "[dynamics]") {
    for (auto kind : {EquationKind::Eulerian, EquationKind::Lagrangian}) {
        SolverParams p = lagrangian_params(1e-3);
        p.kind = kind;
        SolverState s(p, make_named_field("cos1", 4), NoiseSpec::zero(4), 1, 0);
        s.step();
        REQUIRE_THAT(s.field().at({1, 0}).real(),
                     Catch::Matchers::WithinRel(std::exp(-kFourPiSq * 1e-3), 1e-14));
        PathRecord rec = simulate(s, 1.0 - p.dt, SimulateOptions{0, false, false});
        REQUIRE_THAT(rec.final_field.at({1, 0}).real(),
                     Catch::Matchers::WithinRel(std::exp(-kFourPiSq), 1e-12));
        // all other modes stay empty
        double rest = 0.0;
        for (std::size_t i = 1; i < rec.final_field.mode_count(); ++i)
            rest += std::abs(rec.final_field[i]);
        REQUIRE(rest == 0.0);
    }
}

TEST_CASE("step from the zero field is the pure noise increment", "[dynamics]") {
    const NoiseSpec q = NoiseSpec::power_law(3, 1.0, 3.0);
    SolverState s(lagrangian_params(), SpectralField(3), q, 77, 5);
    s.step();
    RngNoiseSource src(77, 5);
    for (std::size_t i = 0; i < s.field().mode_count(); ++i)
        REQUIRE(s.field()[i] == s.noise_amplitude(i) * src.gaussian(0, i));
}

TEST_CASE("Eulerian and Lagrangian agree when K(w)(0) = 0", "[dynamics]") {
    // real coefficients only => psi*(w) = 0 => B1 vanishes
    SpectralField w0(4);
    CounterRng rng(9, 0);
    for (std::size_t i = 0; i < w0.mode_count(); ++i)
        w0[i] = Complex{rng.next_normal() * 0.3, 0.0};
    REQUIRE(psi_star(w0).norm() == 0.0);
    SolverParams pe = lagrangian_params();
    pe.kind = EquationKind::Eulerian;
    SolverState se(pe, w0, NoiseSpec::power_law(4), 3, 1);
    SolverState sl(lagrangian_params(), w0, NoiseSpec::power_law(4), 3, 1);
    se.step();
    sl.step();
    for (std::size_t i = 0; i < w0.mode_count(); ++i) REQUIRE(se.field()[i] == sl.field()[i]);
}

TEST_CASE("simulate records and is bitwise reproducible", "[dynamics]") {
    SECTION("T = 0 keeps only the initial sample") {
        SolverState s(lagrangian_params(), make_named_field("mix", 3), NoiseSpec::power_law(3), 4,
                      0);
        const PathRecord rec = simulate(s, 0.0);
        REQUIRE(rec.samples() == 1);
        REQUIRE(rec.times[0] == 0.0);
    }
    SECTION("same seeds give identical records") {
        auto run = [&]() {
            SolverState s(lagrangian_params(), make_named_field("mix", 3),
                          NoiseSpec::power_law(3), 42, 7);
            return simulate(s, 0.1, SimulateOptions{10, false, false});
        };
        const PathRecord a = run();
        const PathRecord b = run();
        REQUIRE(a.times == b.times);
        REQUIRE(a.l2sq == b.l2sq);
        for (std::size_t i = 0; i < a.samples(); ++i) {
            REQUIRE(a.psi[i].x == b.psi[i].x);
            REQUIRE(a.displacement[i].y == b.displacement[i].y);
        }
        for (std::size_t i = 0; i < a.final_field.mode_count(); ++i)
            REQUIRE(a.final_field[i] == b.final_field[i]);
    }
}

TEST_CASE("independent streams decorrelate trajectories", "[dynamics]") {
    SolverState a(lagrangian_params(), SpectralField(3), NoiseSpec::power_law(3), 42, 0);
    SolverState b(lagrangian_params(), SpectralField(3), NoiseSpec::power_law(3), 42, 1);
    a.step();
    b.step();
    REQUIRE(l2_norm(a.field()) > 0.0);
    SpectralField diff = a.field();
    diff -= b.field();
    REQUIRE(l2_norm(diff) > 0.0);
}

TEST_CASE("noise is matched across cutoffs on shared modes", "[dynamics]") {
    // forcing supported on rings <= 4; linear dynamics evolve each mode
    // independently, so the cutoff-6 run restricted to rings <= 4 must equal
    // the cutoff-4 run bit-exactly (ring-ordered slot addressing).
    auto spec_for = [](int cutoff) {
        NoiseSpec q = NoiseSpec::power_law(cutoff, 1.0, 3.0);
        const ModeTable t(cutoff);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i].ring() > 4) q.override_mode(t[i], 0.0);
        return q;
    };
    SolverParams p = lagrangian_params();
    p.nonlinearity = false;
    SolverState s4(p, SpectralField(4), spec_for(4), 11, 3);
    SolverState s6(p, SpectralField(6), spec_for(6), 11, 3);
    for (int n = 0; n < 50; ++n) {
        s4.step();
        s6.step();
    }
    for (std::size_t i = 0; i < s4.field().mode_count(); ++i)
        REQUIRE(s4.field()[i] == s6.field()[i]);
}

TEST_CASE("Galerkin refinement changes observables by decreasing amounts", "[dynamics]") {
    auto run = [](int cutoff) {
        NoiseSpec q = NoiseSpec::power_law(cutoff, 2.0, 3.0);
        const ModeTable t(cutoff);
        for (std::size_t i = 0; i < t.size(); ++i)
            if (t[i].ring() > 4) q.override_mode(t[i], 0.0);
        SolverState s(lagrangian_params(), SpectralField(cutoff), q, 19, 2);
        return simulate(s, 1.0, SimulateOptions{0, false, false});
    };
    const PathRecord r4 = run(4);
    const PathRecord r6 = run(6);
    const PathRecord r8 = run(8);
    auto diff = [](const PathRecord& a, const PathRecord& b) {
        return (a.displacement.back() - b.displacement.back()).norm() +
               std::abs(a.l2sq.back() - b.l2sq.back());
    };
    const double d46 = diff(r4, r6);
    const double d68 = diff(r6, r8);
    INFO("d46 = " << d46 << ", d68 = " << d68);
    REQUIRE(d46 > 0.0);
    REQUIRE(d68 < 1.2 * d46);
}

TEST_CASE("blow-up raises a diagnostic error", "[dynamics]") {
    SpectralField huge = make_named_field("cos1", 3);
    huge *= 1e13;
    SolverState s(lagrangian_params(), huge, NoiseSpec::zero(3), 1, 0);
    REQUIRE_THROWS_AS(s.step(), BlowUpError);
}

TEST_CASE("deterministic decay check", "[dynamics]") {
    SECTION("zero field is trivial") {
        const DecayReport rep = deterministic_decay_check(SpectralField(3), 0.1, 1e-3);
        REQUIRE(rep.monotone);
        REQUIRE(rep.worst_envelope_ratio == 0.0);
    }
    SECTION("single cosine saturates the envelope to roundoff") {
        const DecayReport rep = deterministic_decay_check(make_named_field("cos1", 3), 0.5, 1e-3);
        REQUIRE(rep.monotone);
        REQUIRE_THAT(rep.worst_envelope_ratio, Catch::Matchers::WithinRel(1.0, 1e-12));
    }
    SECTION("random data decays monotonically") {
        const SpectralField w0 = random_field(6, 123, 1.0, 1.0);
        const DecayReport rep = decay_report(w0, 1.0, 1e-4);
        REQUIRE(rep.monotone);
        REQUIRE(rep.final_norm < l2_norm(w0));
    }
}

TEST_CASE("pathwise energy identity has O(dt^2) per-step defect", "[dynamics]") {
    const SpectralField w0 = random_field(4, 321, 1.0, 1.0);
    auto worst_defect = [&](double dt) {
        SolverParams p = lagrangian_params(dt);
        p.kind = EquationKind::Deterministic;
        SolverState s(p, w0, NoiseSpec::zero(4), 0, 0);
        double prev = std::pow(l2_norm(s.field()), 2);
        double prev_lam = lambda_weighted_energy(s.field(), p.lambda_factor);
        double worst = 0.0;
        for (int n = 0; n < 64; ++n) {
            s.step();
            const double cur = std::pow(l2_norm(s.field()), 2);
            const double lam = lambda_weighted_energy(s.field(), p.lambda_factor);
            // trapezoid form of the dissipation keeps the defect at O(dt^2)
            worst = std::max(worst, std::abs(cur - prev + dt * (lam + prev_lam)));
            prev = cur;
            prev_lam = lam;
        }
        return worst;
    };
    const double coarse = worst_defect(1e-3);
    const double fine = worst_defect(5e-4);
    INFO("coarse = " << coarse << ", fine = " << fine);
    REQUIRE(fine < coarse / 2.5);
    REQUIRE(coarse < 16.0 * fine);
}

TEST_CASE("shared-noise contraction envelope stays controlled", "[dynamics]") {
    const SpectralField w0 = random_field(4, 55, 1.0, 0.8);
    SpectralField w1 = w0;
    SpectralField bump = make_named_field("mix", 4);
    bump *= 0.1;
    w1 += bump;
    SolverState s0(lagrangian_params(), w0, NoiseSpec::power_law(4), 13, 4);
    SolverState s1(lagrangian_params(), w1, NoiseSpec::power_law(4), 13, 4);
    SpectralField d0 = w1;
    d0 -= w0;
    const double base = l2_norm(d0);
    std::vector<double> log_ratio, envelope;
    double acc = 0.0;
    const double dt = 1e-3;
    for (int n = 0; n < 2000; ++n) {
        acc += dt * std::pow(hr_norm(s0.field(), 1.0), 2);
        s0.step();
        s1.step();
        SpectralField d = s1.field();
        d -= s0.field();
        log_ratio.push_back(std::log(l2_norm(d) / base));
        envelope.push_back(acc + (n + 1) * dt);
    }
    // fitted run-level constant over the first half bounds the second half
    double c_fit = 0.0;
    for (std::size_t i = 0; i < log_ratio.size() / 2; ++i)
        c_fit = std::max(c_fit, log_ratio[i] / envelope[i]);
    c_fit = std::max(c_fit, 0.1);
    for (std::size_t i = log_ratio.size() / 2; i < log_ratio.size(); ++i)
        REQUIRE(log_ratio[i] <= c_fit * envelope[i] * 1.05 + 0.05);
}

TEST_CASE("conjugate noise drives the reflected trajectory", "[dynamics]") {
    const SpectralField w0 = random_field(4, 66, 1.0, 0.5);
    auto base = std::make_shared<RngNoiseSource>(91, 2);
    SolverState s(lagrangian_params(), w0, NoiseSpec::power_law(4), base);
    SolverState sr(lagrangian_params(), reflect(w0), NoiseSpec::power_law(4),
                   std::make_shared<ConjugateNoiseSource>(base));
    for (int n = 0; n < 200; ++n) {
        s.step();
        sr.step();
    }
    const SpectralField want = reflect(s.field());
    for (std::size_t i = 0; i < want.mode_count(); ++i) {
        REQUIRE_THAT(sr.field()[i].real(), Catch::Matchers::WithinAbs(want[i].real(), 1e-13));
        REQUIRE_THAT(sr.field()[i].imag(), Catch::Matchers::WithinAbs(want[i].imag(), 1e-13));
    }
}

TEST_CASE("stochastic energy balance holds in expectation", "[dynamics]") {
    // E|w(T)|^2 + 2 int E sum lambda_k |w_k|^2 = |w0|^2 + trQ^2 T
    const int paths = 100;
    const double T = 2.0;
    const NoiseSpec q = NoiseSpec::power_law(3, 1.0, 3.0);
    const SpectralField w0 = make_named_field("checker", 3);
    std::vector<double> lhs(paths);
    for (int j = 0; j < paths; ++j) {
        SolverState s(lagrangian_params(), w0, q, 1234, static_cast<std::uint64_t>(j));
        const PathRecord rec = simulate(s, T, SimulateOptions{0, false, false});
        lhs[static_cast<std::size_t>(j)] =
            rec.l2sq.back() + 2.0 * rec.int_lambda_sq.back();
    }
    const double rhs = std::pow(l2_norm(w0), 2) + q.tr_q2() * T;
    const double m = mean(lhs);
    const double se = jackknife_se_mean(lhs);
    INFO("lhs = " << m << " +- " << se << ", rhs = " << rhs);
    REQUIRE(std::abs(m - rhs) < 4.0 * se + 1e-3 * rhs);
}
