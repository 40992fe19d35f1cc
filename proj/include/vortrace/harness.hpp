#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vortrace/config.hpp"
#include "vortrace/dynamics.hpp"
#include "vortrace/linearization.hpp"
#include "vortrace/snapshot.hpp"
#include "vortrace/statistics.hpp"
#include "vortrace/tracer.hpp"

#include <json.hpp>

namespace vortrace::harness {

namespace fs = std::filesystem;

struct RunContext {
    RunConfig cfg;
    std::string out_dir;
    unsigned threads = 1;
    std::string resume_path;  // simulate only
};

inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir);
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline void write_manifest(const RunContext& ctx, const std::string& subcommand) {
    std::string m = "subcommand = " + subcommand + "\n" + config_manifest(ctx.cfg);
    write_file(ctx.out_dir + "/manifest.txt", m);
}

/// Observable rows, comma-separated, 17 significant digits.
inline std::string path_record_csv(const PathRecord& rec) {
    std::string out = "t,l2sq,h1sq,lambda_sq,psi1,psi2,disp1,disp2\n";
    for (std::size_t i = 0; i < rec.samples(); ++i) {
        out += format_g17(rec.times[i]) + "," + format_g17(rec.l2sq[i]) + "," +
               format_g17(rec.h1sq[i]) + "," + format_g17(rec.lambda_sq[i]) + "," +
               format_g17(rec.psi[i].x) + "," + format_g17(rec.psi[i].y) + "," +
               format_g17(rec.displacement[i].x) + "," + format_g17(rec.displacement[i].y) + "\n";
    }
    return out;
}

inline SpectralField resolve_initial(const RunConfig& cfg) {
    if (cfg.initial_type == "snapshot") {
        const Snapshot snap = snapshot_load(cfg.initial_path);
        if (snap.cutoff != cfg.cutoff)
            throw ConfigError("[initial].path: snapshot cutoff " + std::to_string(snap.cutoff) +
                              " does not match [run].cutoff");
        return snap.field;
    }
    return cfg.initial_field();
}

/// simulate: one path, observables CSV, final state snapshot. With a resume
/// snapshot the trajectory continues bit-exactly (counter-based noise is
/// addressed by step index).
inline int run_simulate(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "simulate");
    const RunConfig& cfg = ctx.cfg;

    SpectralField w0(cfg.cutoff);
    std::uint64_t start_step = 0;
    std::uint64_t seed = cfg.seed;
    std::uint64_t stream = 0;
    if (!ctx.resume_path.empty()) {
        const Snapshot snap = snapshot_load(ctx.resume_path);
        if (snap.cutoff != cfg.cutoff)
            throw ConfigError("--resume: snapshot cutoff does not match [run].cutoff");
        w0 = snap.field;
        start_step = static_cast<std::uint64_t>(std::llround(snap.time / cfg.dt));
        seed = snap.rng.seed;
        stream = snap.rng.stream;
    } else {
        w0 = resolve_initial(cfg);
    }

    SolverState state(cfg.solver_params(), w0, cfg.noise_spec(), seed, stream);
    state.set_step_index(start_step);

    SimulateOptions opts;
    opts.cadence = cfg.cadence;
    int status = 0;
    PathRecord rec;
    try {
        const double remaining = cfg.T - state.t();
        rec = simulate(state, remaining > 0.0 ? remaining : 0.0, opts);
    } catch (const BlowUpError& e) {
        write_file(ctx.out_dir + "/error.txt", std::string("blow-up: ") + e.what() + "\n");
        if (e.partial) rec = *e.partial;
        status = 2;
    }
    write_file(ctx.out_dir + "/observables.csv", path_record_csv(rec));

    Snapshot snap;
    snap.cutoff = cfg.cutoff;
    snap.time = state.t();
    snap.field = state.field();
    snap.rng = RngState{seed, stream, (state.step_index() << kSlotBits)};
    snapshot_save(snap, ctx.out_dir + "/state.vtrc");
    return status;
}

/// tracer: Eulerian field + tracer + Psi-map round-trip check.
inline int run_tracer(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "tracer");
    RunConfig cfg = ctx.cfg;
    cfg.kind = "eulerian";
    SolverState state(cfg.solver_params(), resolve_initial(cfg), cfg.noise_spec(), cfg.seed, 0);
    SimulateOptions opts;
    opts.cadence = 1;
    opts.record_fields = true;
    const TracerRunResult run =
        simulate_with_tracer(state, cfg.T, cfg.tracer_x0, opts, cfg.tracer_start_steps);

    const PathRecord omega = eulerian_to_lagrangian(run.field_path, run.tracer);
    const TracerPath rec = lagrangian_to_trajectory(omega, cfg.tracer_x0);

    std::string csv = "t,x1,x2,x1_wrapped,x2_wrapped,x1_reconstructed,x2_reconstructed\n";
    double max_err = 0.0;
    for (std::size_t i = 0; i < run.tracer.samples(); ++i) {
        csv += format_g17(run.tracer.times[i]) + "," + format_g17(run.tracer.lift[i].x) + "," +
               format_g17(run.tracer.lift[i].y) + "," + format_g17(run.tracer.wrapped[i].x) +
               "," + format_g17(run.tracer.wrapped[i].y) + "," + format_g17(rec.lift[i].x) +
               "," + format_g17(rec.lift[i].y) + "\n";
        max_err = std::max(max_err, (run.tracer.lift[i] - rec.lift[i]).norm());
    }
    write_file(ctx.out_dir + "/tracer.csv", csv);
    write_file(ctx.out_dir + "/roundtrip.txt",
               "max_roundtrip_error = " + format_g17(max_err) + "\n");
    return 0;
}

/// ensemble: LLN / variance / CLT pipeline with optional Green-Kubo.
inline int run_ensemble(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "ensemble");
    const RunConfig& cfg = ctx.cfg;

    EnsembleRunParams p;
    p.mc.solver = cfg.solver_params();
    p.mc.solver.kind = EquationKind::Lagrangian;
    p.mc.noise = cfg.noise_spec();
    p.mc.seed = cfg.seed;
    p.mc.threads = ctx.threads;
    p.w0 = resolve_initial(cfg);
    p.T = cfg.T;
    p.paths = cfg.ensemble_paths;
    p.antithetic = cfg.antithetic;
    const EnsembleRaw raw = run_displacement_ensemble(p);
    const EnsembleSummary summary = summarize_ensemble(raw);
    const Vec2 v_center = cfg.v_star_zero ? Vec2{0.0, 0.0} : summary.v_hat.value;
    const Vec2 v_center_se = cfg.v_star_zero ? Vec2{0.0, 0.0} : summary.v_hat.se;

    std::string csv = "path,x1,x2,x1_half,x2_half\n";
    for (std::size_t j = 0; j < raw.x_final.size(); ++j)
        csv += std::to_string(j) + "," + format_g17(raw.x_final[j].x) + "," +
               format_g17(raw.x_final[j].y) + "," + format_g17(raw.x_half[j].x) + "," +
               format_g17(raw.x_half[j].y) + "\n";
    write_file(ctx.out_dir + "/displacements.csv", csv);

    nlohmann::ordered_json j;
    j["paths"] = summary.paths;
    j["T"] = summary.T;
    j["v_hat"] = {summary.v_hat.value.x, summary.v_hat.value.y};
    j["v_se"] = {summary.v_hat.se.x, summary.v_hat.se.y};
    j["D_direct"] = {{summary.d_direct.value.a, summary.d_direct.value.b},
                     {summary.d_direct.value.c, summary.d_direct.value.d}};
    j["D_direct_ci_lo"] = {{summary.d_direct.ci_lo.a, summary.d_direct.ci_lo.b},
                           {summary.d_direct.ci_lo.c, summary.d_direct.ci_lo.d}};
    j["D_direct_ci_hi"] = {{summary.d_direct.ci_hi.a, summary.d_direct.ci_hi.b},
                           {summary.d_direct.ci_hi.c, summary.d_direct.ci_hi.d}};
    j["clt"] = {{"ks_x_stat", summary.clt.ks_x.statistic},
                {"ks_x_p", summary.clt.ks_x.p_value},
                {"ks_y_stat", summary.clt.ks_y.statistic},
                {"ks_y_p", summary.clt.ks_y.p_value},
                {"mardia_skewness", summary.clt.mardia_skewness},
                {"mardia_kurtosis", summary.clt.mardia_kurtosis},
                {"degenerate", summary.clt.degenerate},
                {"pass", summary.clt.pass},
                {"alpha", summary.clt.alpha}};
    j["rms_half"] = summary.rms_half;
    j["rms_final"] = summary.rms_final;
    // stationary energy balance from the same paths (free: the dissipation
    // integral is accumulated alongside the displacements)
    const double trq2 = cfg.noise_spec().tr_q2();
    j["balance_ratio"] =
        trq2 > 0.0 ? 2.0 * raw.int_lambda_sq_mean / (cfg.T * trq2) : 0.0;
    if (cfg.green_kubo) {
        const auto samples = sample_stationary(p.w0, p.mc, cfg.burn_in, cfg.thinning,
                                               cfg.corrector_outer, 7);
        CorrectorSettings cs;
        cs.t = cfg.corrector_t;
        cs.inner = cfg.corrector_inner;
        cs.v_star = v_center;
        const GreenKuboData data = green_kubo_collect(samples, p.mc, cs);
        const MatrixEstimate gk = green_kubo_D(data, v_center, v_center_se);
        j["D_green_kubo"] = {{gk.value.a, gk.value.b}, {gk.value.c, gk.value.d}};
        j["D_green_kubo_ci_lo"] = {{gk.ci_lo.a, gk.ci_lo.b}, {gk.ci_lo.c, gk.ci_lo.d}};
        j["D_green_kubo_ci_hi"] = {{gk.ci_hi.a, gk.ci_hi.b}, {gk.ci_hi.c, gk.ci_hi.d}};
        j["green_kubo_tail"] = data.tail_norm(v_center);
    }
    write_file(ctx.out_dir + "/summary.json", j.dump(2) + "\n");
    return 0;
}

/// corrector: chi estimates at the configured evaluation field.
inline int run_corrector(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "corrector");
    const RunConfig& cfg = ctx.cfg;
    McSetup mc;
    mc.solver = cfg.solver_params();
    mc.noise = cfg.noise_spec();
    mc.seed = cfg.seed;
    mc.threads = ctx.threads;
    CorrectorSettings cs;
    cs.t = cfg.corrector_t;
    cs.inner = cfg.corrector_inner;
    const SpectralField w = resolve_initial(cfg);
    const CorrectorEstimate est = corrector(w, mc, cs);
    nlohmann::ordered_json j;
    j["t"] = est.t;
    j["inner"] = est.inner;
    j["chi"] = {est.value.x, est.value.y};
    j["chi_half"] = {est.value_half.x, est.value_half.y};
    j["tail"] = {est.tail.x, est.tail.y};
    j["se"] = {est.se.x, est.se.y};
    write_file(ctx.out_dir + "/corrector.json", j.dump(2) + "\n");
    return 0;
}

/// coupling: lockstep run with the Lemma L2/L3 diagnostics.
inline int run_coupling(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "coupling");
    const RunConfig& cfg = ctx.cfg;
    SpectralField xi0 = make_named_field(cfg.coupling_xi, cfg.cutoff);
    const double n = l2_norm(xi0);
    if (n > 1.0) xi0 *= 1.0 / n;
    CoupledOptions opts;
    opts.n0 = cfg.coupling_n0;
    CoupledSystem sys(cfg.solver_params(), resolve_initial(cfg), xi0, cfg.noise_spec(), cfg.seed,
                      0, opts);
    const CoupledRecord rec = sys.run(cfg.T, cfg.cadence);
    std::string csv = "t,mismatch,xi_norm,zeta_norm_sq,zeta_low_norm,g_norm_sq,int_g_sq\n";
    for (std::size_t i = 0; i < rec.times.size(); ++i)
        csv += format_g17(rec.times[i]) + "," + format_g17(rec.mismatch[i]) + "," +
               format_g17(rec.xi_norm[i]) + "," + format_g17(rec.zeta_norm_sq[i]) + "," +
               format_g17(rec.zeta_low_norm[i]) + "," + format_g17(rec.g_norm_sq[i]) + "," +
               format_g17(rec.int_g_sq[i]) + "\n";
    write_file(ctx.out_dir + "/coupling.csv", csv);
    nlohmann::ordered_json j;
    j["n0"] = sys.n0();
    j["max_mismatch"] = rec.max_mismatch;
    j["max_mismatch_scale"] = rec.max_mismatch_scale;
    j["zeta_low_final"] = rec.zeta_low_norm.back();
    j["int_g_sq_final"] = rec.int_g_sq.back();
    write_file(ctx.out_dir + "/coupling.json", j.dump(2) + "\n");
    return 0;
}

/// diagnose: moment monitors and the energy balance on one path.
inline int run_diagnose(const RunContext& ctx) {
    ensure_dir(ctx.out_dir);
    write_manifest(ctx, "diagnose");
    const RunConfig& cfg = ctx.cfg;
    SolverParams params = cfg.solver_params();
    SolverState state(params, resolve_initial(cfg), cfg.noise_spec(), cfg.seed, 0);
    SimulateOptions opts;
    opts.cadence = cfg.cadence;
    const PathRecord rec = simulate(state, cfg.T, opts);
    const MomentReport rep = moment_monitors(rec, cfg.noise_spec());
    write_file(ctx.out_dir + "/observables.csv", path_record_csv(rec));
    nlohmann::ordered_json j;
    j["balance_ratio"] = rep.balance_ratio;
    j["nu"] = rep.nu;
    j["exp_moment_max"] = rep.exp_moment_max;
    j["exp_moment_first_half"] = rep.exp_moment_first_half;
    j["exp_moment_second_half"] = rep.exp_moment_second_half;
    j["exp_moment_bounded"] = rep.exp_moment_bounded;
    j["v_norm_moment_1"] = rep.v_norm_moments[0];
    j["v_norm_moment_2"] = rep.v_norm_moments[1];
    j["v_norm_moment_4"] = rep.v_norm_moments[2];
    write_file(ctx.out_dir + "/diagnose.json", j.dump(2) + "\n");
    return 0;
}

inline int dispatch(const std::string& subcommand, const RunContext& ctx) {
    if (subcommand == "simulate") return run_simulate(ctx);
    if (subcommand == "tracer") return run_tracer(ctx);
    if (subcommand == "ensemble") return run_ensemble(ctx);
    if (subcommand == "corrector") return run_corrector(ctx);
    if (subcommand == "coupling") return run_coupling(ctx);
    if (subcommand == "diagnose") return run_diagnose(ctx);
    throw ConfigError("unknown subcommand '" + subcommand + "'");
}

}  // namespace vortrace::harness
