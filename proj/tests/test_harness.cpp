#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "vortrace/harness.hpp"

using namespace vortrace;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path dir;
    explicit TempDir(const std::string& name) {
        dir = fs::temp_directory_path() / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string sub(const std::string& s) const { return (dir / s).string(); }
};

RunConfig small_config() {
    RunConfig cfg;
    cfg.cutoff = 3;
    cfg.dt = 1e-3;
    cfg.T = 0.2;
    cfg.seed = 5;
    cfg.cadence = 50;
    return cfg;
}

}  // namespace

TEST_CASE("simulate writes manifest, csv and snapshot; reruns are identical", "[harness]") {
    TempDir tmp("vortrace_harness_sim");
    harness::RunContext ctx;
    ctx.cfg = small_config();
    ctx.out_dir = tmp.sub("a");
    REQUIRE(harness::run_simulate(ctx) == 0);
    REQUIRE(fs::exists(tmp.sub("a") + "/manifest.txt"));
    const std::string csv_a = slurp(tmp.sub("a") + "/observables.csv");
    REQUIRE(csv_a.rfind("t,l2sq,h1sq,lambda_sq,psi1,psi2,disp1,disp2\n", 0) == 0);

    ctx.out_dir = tmp.sub("b");
    REQUIRE(harness::run_simulate(ctx) == 0);
    REQUIRE(slurp(tmp.sub("b") + "/observables.csv") == csv_a);
    REQUIRE(slurp(tmp.sub("b") + "/state.vtrc") == slurp(tmp.sub("a") + "/state.vtrc"));
}

TEST_CASE("snapshot resume continues the exact trajectory", "[harness]") {
    TempDir tmp("vortrace_harness_resume");
    harness::RunContext full;
    full.cfg = small_config();
    full.cfg.T = 0.2;
    full.out_dir = tmp.sub("full");
    REQUIRE(harness::run_simulate(full) == 0);

    harness::RunContext half;
    half.cfg = small_config();
    half.cfg.T = 0.1;
    half.out_dir = tmp.sub("half");
    REQUIRE(harness::run_simulate(half) == 0);

    harness::RunContext resumed;
    resumed.cfg = small_config();
    resumed.cfg.T = 0.2;
    resumed.out_dir = tmp.sub("resumed");
    resumed.resume_path = tmp.sub("half") + "/state.vtrc";
    REQUIRE(harness::run_simulate(resumed) == 0);

    REQUIRE(slurp(tmp.sub("resumed") + "/state.vtrc") == slurp(tmp.sub("full") + "/state.vtrc"));
    // resumed per-time columns match the tail of the full run (displacement
    // columns restart at the resume point: the trapezoid accumulators are
    // not part of the snapshot format)
    const std::string full_csv = slurp(tmp.sub("full") + "/observables.csv");
    const std::string res_csv = slurp(tmp.sub("resumed") + "/observables.csv");
    const std::string last_row = res_csv.substr(res_csv.rfind('\n', res_csv.size() - 2) + 1);
    auto state_columns = [](const std::string& row) {
        std::size_t pos = 0;
        for (int c = 0; c < 6; ++c) pos = row.find(',', pos) + 1;
        return row.substr(0, pos);
    };
    REQUIRE(full_csv.find(state_columns(last_row)) != std::string::npos);
}

TEST_CASE("blow-up produces partial outputs and nonzero status", "[harness]") {
    TempDir tmp("vortrace_harness_blowup");
    harness::RunContext ctx;
    ctx.cfg = small_config();
    ctx.cfg.noise_amplitude = 1e14;  // forces the threshold immediately
    ctx.out_dir = tmp.sub("x");
    REQUIRE(harness::run_simulate(ctx) == 2);
    REQUIRE(fs::exists(tmp.sub("x") + "/error.txt"));
    REQUIRE(fs::exists(tmp.sub("x") + "/observables.csv"));
}

TEST_CASE("tracer subcommand reports the round-trip error", "[harness]") {
    TempDir tmp("vortrace_harness_tracer");
    harness::RunContext ctx;
    ctx.cfg = small_config();
    ctx.cfg.T = 0.1;
    ctx.cfg.tracer_enabled = true;
    ctx.out_dir = tmp.sub("t");
    REQUIRE(harness::run_tracer(ctx) == 0);
    const std::string report = slurp(tmp.sub("t") + "/roundtrip.txt");
    REQUIRE(report.find("max_roundtrip_error = ") != std::string::npos);
    const double err = std::stod(report.substr(report.find('=') + 1));
    REQUIRE(err < 1e-5);
}

TEST_CASE("ensemble subcommand writes displacements and a summary", "[harness]") {
    TempDir tmp("vortrace_harness_ens");
    harness::RunContext ctx;
    ctx.cfg = small_config();
    ctx.cfg.T = 1.0;
    ctx.cfg.ensemble_paths = 150;
    ctx.cfg.nonlinearity = false;
    ctx.cfg.dt = 1e-2;
    ctx.cfg.green_kubo = true;
    ctx.cfg.v_star_zero = true;
    ctx.cfg.burn_in = 1.0;
    ctx.cfg.thinning = 0.2;
    ctx.cfg.corrector_outer = 16;
    ctx.cfg.corrector_inner = 2;
    ctx.cfg.corrector_t = 0.2;
    ctx.out_dir = tmp.sub("e");
    REQUIRE(harness::run_ensemble(ctx) == 0);
    const std::string summary = slurp(tmp.sub("e") + "/summary.json");
    REQUIRE(summary.find("\"v_hat\"") != std::string::npos);
    REQUIRE(summary.find("\"D_direct\"") != std::string::npos);
    REQUIRE(summary.find("\"ks_x_p\"") != std::string::npos);
    REQUIRE(summary.find("\"D_green_kubo\"") != std::string::npos);
    REQUIRE(summary.find("\"balance_ratio\"") != std::string::npos);
    const std::string csv = slurp(tmp.sub("e") + "/displacements.csv");
    REQUIRE(csv.rfind("path,x1,x2,x1_half,x2_half\n", 0) == 0);
}

TEST_CASE("corrector and coupling and diagnose subcommands run", "[harness]") {
    TempDir tmp("vortrace_harness_misc");
    harness::RunContext ctx;
    ctx.cfg = small_config();
    ctx.cfg.initial_type = "analytic";
    ctx.cfg.initial_name = "mix";
    ctx.cfg.corrector_t = 0.2;
    ctx.cfg.corrector_inner = 4;
    ctx.out_dir = tmp.sub("c");
    REQUIRE(harness::run_corrector(ctx) == 0);
    REQUIRE(slurp(tmp.sub("c") + "/corrector.json").find("\"chi\"") != std::string::npos);

    ctx.cfg.T = 0.3;
    ctx.cfg.coupling_n0 = 2;
    ctx.cfg.cadence = 10;
    ctx.out_dir = tmp.sub("k");
    REQUIRE(harness::run_coupling(ctx) == 0);
    REQUIRE(slurp(tmp.sub("k") + "/coupling.json").find("max_mismatch") != std::string::npos);

    ctx.cfg.T = 1.0;
    ctx.out_dir = tmp.sub("d");
    REQUIRE(harness::run_diagnose(ctx) == 0);
    REQUIRE(slurp(tmp.sub("d") + "/diagnose.json").find("balance_ratio") != std::string::npos);
}

TEST_CASE("csv numbers carry 17 significant digits", "[harness]") {
    REQUIRE(format_g17(1.0 / 3.0) == "0.33333333333333331");
    REQUIRE(format_g17(kFourPiSq) == "39.478417604357432");
    const double x = 0.1234567890123456789;
    REQUIRE(std::stod(format_g17(x)) == x);
}
