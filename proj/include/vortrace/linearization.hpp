#pragma once

#include <cmath>
#include <complex>
#include <memory>
#include <stdexcept>
#include <vector>

#include "vortrace/bilinear.hpp"
#include "vortrace/dynamics.hpp"
#include "vortrace/field.hpp"
#include "vortrace/noise.hpp"

namespace vortrace {

class DegeneracyError : public std::runtime_error {
  public:
    explicit DegeneracyError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// phi1(z) = (1 - e^{-z})/z and phi2(z) = (e^{-z} - 1 + z)/z^2, the
/// exponential-integrator weights. Series fallback near zero.
inline double phi1(double z) {
    if (std::abs(z) < 1e-3) return 1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0;
    return -std::expm1(-z) / z;
}
inline double phi2(double z) {
    if (std::abs(z) < 1e-3) return 0.5 - z / 6.0 + z * z / 24.0 - z * z * z / 120.0;
    return (std::expm1(-z) + z) / (z * z);
}

/// Evaluates the symmetrized linearized transport
///   Bs(omega, f) = -B0(omega,f) - B0(f,omega) + B1(omega,f) + B1(f,omega)
/// against a fixed base field omega, sharing the omega grids between calls.
/// Grid work: two packed inverse transforms per base, two inverse + one
/// forward per applied field.
class BsEvaluator {
  public:
    explicit BsEvaluator(int cutoff)
        : cutoff_(cutoff),
          grid_(dealias_grid(cutoff)),
          base_vel_(grid_),
          base_grad_(grid_),
          f_vel_(grid_),
          f_grad_(grid_),
          prod_(grid_) {}

    int cutoff() const { return cutoff_; }

    /// Loads grids of K(omega) and grad(omega); psi*(omega) for B1.
    void set_base(const SpectralField& omega) {
        if (omega.cutoff() != cutoff_) throw std::invalid_argument("BsEvaluator: cutoff mismatch");
        base_ = omega;
        base_psi_ = psi_star(omega);
        scatter_velocity(omega, base_vel_);
        base_vel_.synthesize();
        scatter_gradient(omega, base_grad_);
        base_grad_.synthesize();
    }

    const SpectralField& base() const { return base_; }

    /// out = Bs(base, f). Pure function of (base, f).
    void bs(const SpectralField& f, SpectralField& out) {
        if (f.cutoff() != cutoff_) throw std::invalid_argument("BsEvaluator: cutoff mismatch");
        scatter_velocity(f, f_vel_);
        f_vel_.synthesize();
        scatter_gradient(f, f_grad_);
        f_grad_.synthesize();

        // pack (K(base).grad f) + i (K(f).grad base)
        const auto* a = base_vel_.data();
        const auto* gb = f_grad_.data();
        const auto* av = f_vel_.data();
        const auto* ga = base_grad_.data();
        auto* p = prod_.data();
        const std::size_t n = prod_.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double adv_base_f = a[j].real() * gb[j].real() + a[j].imag() * gb[j].imag();
            const double adv_f_base = av[j].real() * ga[j].real() + av[j].imag() * ga[j].imag();
            p[j] = Complex{adv_base_f, adv_f_base};
        }
        prod_.analyze();

        if (out.cutoff() != cutoff_) out = SpectralField(cutoff_);
        const double scale = 1.0 / (static_cast<double>(grid_) * grid_);
        const Vec2 vf = psi_star(f);
        const Complex two_pi_i{0.0, kTwoPi};
        for (std::size_t i = 0; i < out.mode_count(); ++i) {
            const Wavevector& k = out.table()[i];
            const Complex pk = p[prod_.slot(k.k1, k.k2)] * scale;
            const Complex pmk = std::conj(p[prod_.slot(-k.k1, -k.k2)]) * scale;
            const Complex b0_base_f = 0.5 * (pk + pmk);                   // real field 1
            const Complex b0_f_base = Complex{0.0, -0.5} * (pk - pmk);    // real field 2
            const Complex b1_base_f =
                two_pi_i * (base_psi_.x * k.k1 + base_psi_.y * k.k2) * f[i];
            const Complex b1_f_base = two_pi_i * (vf.x * k.k1 + vf.y * k.k2) * base_[i];
            out[i] = -b0_base_f - b0_f_base + b1_base_f + b1_f_base;
        }
    }

  private:
    static void scatter_velocity(const SpectralField& w, GridBuffer& buf) {
        buf.clear();
        auto* a = buf.data();
        const Complex minus_i{0.0, -1.0};
        for (std::size_t i = 0; i < w.mode_count(); ++i) {
            const Wavevector& k = w.table()[i];
            const Complex f = minus_i / (kTwoPi * k.norm2()) * w[i];
            const Complex u1 = static_cast<double>(k.k2) * f;
            const Complex u2 = static_cast<double>(-k.k1) * f;
            a[buf.slot(k.k1, k.k2)] = u1 + Complex{0.0, 1.0} * u2;
            a[buf.slot(-k.k1, -k.k2)] = std::conj(u1) + Complex{0.0, 1.0} * std::conj(u2);
        }
    }
    static void scatter_gradient(const SpectralField& w, GridBuffer& buf) {
        buf.clear();
        auto* b = buf.data();
        const Complex two_pi_i{0.0, kTwoPi};
        for (std::size_t i = 0; i < w.mode_count(); ++i) {
            const Wavevector& k = w.table()[i];
            const Complex g1 = two_pi_i * static_cast<double>(k.k1) * w[i];
            const Complex g2 = two_pi_i * static_cast<double>(k.k2) * w[i];
            b[buf.slot(k.k1, k.k2)] = g1 + Complex{0.0, 1.0} * g2;
            b[buf.slot(-k.k1, -k.k2)] = std::conj(g1) + Complex{0.0, 1.0} * std::conj(g2);
        }
    }

    int cutoff_;
    int grid_;
    SpectralField base_;
    Vec2 base_psi_{0.0, 0.0};
    GridBuffer base_vel_;
    GridBuffer base_grad_;
    GridBuffer f_vel_;
    GridBuffer f_grad_;
    GridBuffer prod_;
};

/// Reference Bs via the convolution backend (tests / standalone calls).
inline SpectralField bs_convolution(const SpectralField& omega, const SpectralField& f) {
    SpectralField out = b0_convolution(omega, f);
    out += b0_convolution(f, omega);
    for (auto& c : out.coeffs()) c = -c;
    out += b1_apply(omega, f);
    out += b1_apply(f, omega);
    return out;
}

struct ControlForce {
    SpectralField f;  // low-mode force, f = -Delta ζ|low + Π_low Bs(ω,ζ) + ζ_N/(2|ζ_N|)
    SpectralField g;  // Q^{-1} f
    double g_norm_sq = 0.0;
};

/// Euclidean low-mode norm |ζ_N| = |Π_{<n0} ζ| (full lattice).
inline double low_mode_norm(const SpectralField& zeta, int n0) {
    double acc = 0.0;
    for (std::size_t i = 0; i < zeta.mode_count(); ++i)
        if (zeta.table()[i].norm2() < n0 * n0) acc += std::norm(zeta[i]);
    return std::sqrt(2.0 * acc);
}

/// Assembles the control force from a precomputed Bs(omega, zeta). Low modes
/// (|k| < n0) only; the ζ_N/|ζ_N| term follows the convention 0/0 := 0.
/// g divides by q_k, so every low mode must be forced.
inline ControlForce assemble_control(const SpectralField& zeta, const SpectralField& bs_field,
                                     int n0, const NoiseSpec& noise, double lambda_factor) {
    const int cutoff = zeta.cutoff();
    ControlForce out{SpectralField(cutoff), SpectralField(cutoff), 0.0};
    const double znorm = low_mode_norm(zeta, n0);
    for (std::size_t i = 0; i < zeta.mode_count(); ++i) {
        const Wavevector& k = zeta.table()[i];
        if (k.norm2() >= n0 * n0) continue;
        const double lambda = lambda_factor * k.norm2();
        Complex f = -lambda * zeta[i] + bs_field[i];
        if (znorm > 0.0) f += 0.5 * zeta[i] / znorm;
        out.f[i] = f;
        const double qk = noise.q(i);
        if (qk == 0.0) {
            if (f != Complex{0.0, 0.0})
                throw DegeneracyError("control_force: q_k = 0 on forced low mode (k = (" +
                                      std::to_string(k.k1) + "," + std::to_string(k.k2) + "))");
            out.g[i] = Complex{0.0, 0.0};
        } else {
            out.g[i] = f / qk;
        }
        out.g_norm_sq += 2.0 * std::norm(out.g[i]);
    }
    return out;
}

/// Standalone control_force with the reference Bs.
inline ControlForce control_force(const SpectralField& omega, const SpectralField& zeta, int n0,
                                  const NoiseSpec& noise, double lambda_factor = kFourPiSq) {
    omega.check_same(zeta);
    return assemble_control(zeta, bs_convolution(omega, zeta), n0, noise, lambda_factor);
}

struct CoupledOptions {
    int n0 = 0;              // low-mode cutoff; default cutoff/2 when 0
    std::uint64_t cadence = 1;
};

/// Per-sample diagnostics of a coupled run.
struct CoupledRecord {
    std::vector<double> times;
    std::vector<double> mismatch;       // |xi - D - zeta|
    std::vector<double> xi_norm;        // |xi|
    std::vector<double> zeta_norm_sq;   // |zeta|^2
    std::vector<double> zeta_low_norm;  // |zeta_N|
    std::vector<double> g_norm_sq;      // |g(t)|^2
    std::vector<double> int_g_sq;       // trapezoid of |g|^2
    double max_mismatch = 0.0;
    double max_mismatch_scale = 0.0;  // max over samples of |xi| + |zeta|
};

/// Lockstep integration of the Lagrangian base path omega(t), the derivative
/// flow xi(t), the controlled difference zeta(t), and the Malliavin
/// derivative D(t) driven by g = Q^{-1} f.
///
/// xi and D advance by ETD2RK (two-stage exponential); zeta advances its
/// high modes the same way and its low modes by the analytic unit-speed
/// radial shrink d|ζ_N|/dt = -1/2 (direction frozen, extinction exact, so
/// ζ_N(t) = 0 for t >= 2|ζ_N(0)| holds bit-exactly). The stage-2 control
/// force is evaluated at the exactly-updated zeta, which keeps the discrete
/// xi - D - zeta mismatch at the O(dt^2) of the smooth transport terms.
class CoupledSystem {
  public:
    CoupledSystem(SolverParams base_params, SpectralField w0, SpectralField xi0, NoiseSpec noise,
                  std::uint64_t seed, std::uint64_t stream, CoupledOptions opts = {})
        : CoupledSystem(base_params, std::move(w0), std::move(xi0), std::move(noise),
                        std::make_shared<RngNoiseSource>(seed, stream), opts) {}

    CoupledSystem(SolverParams base_params, SpectralField w0, SpectralField xi0, NoiseSpec noise,
                  std::shared_ptr<NoiseSource> source, CoupledOptions opts = {})
        : base_(make_base(base_params), std::move(w0), noise, std::move(source)),
          noise_(std::move(noise)),
          xi_(xi0),
          zeta_(xi0),
          malliavin_(xi0.cutoff()),
          n0_(opts.n0 > 0 ? opts.n0 : std::max(1, xi0.cutoff() / 2)),
          eval_(xi0.cutoff()),
          scratch_(xi0.cutoff()),
          nl_xi_(xi0.cutoff()),
          nl_zeta_(xi0.cutoff()),
          nl_d_(xi0.cutoff()) {
        if (xi0.cutoff() != base_.field().cutoff())
            throw std::invalid_argument("CoupledSystem: cutoff mismatch");
        if (n0_ > xi0.cutoff())
            throw std::invalid_argument("CoupledSystem: n0 must be <= cutoff");
        if (l2_norm(xi0) > 1.0 + 1e-12)
            throw std::invalid_argument("CoupledSystem: |xi0| must be <= 1");
        for (std::size_t i = 0; i < noise_.mode_count(); ++i) {
            const Wavevector& k = base_.field().table()[i];
            if (k.norm2() < n0_ * n0_ && noise_.q(i) == 0.0)
                throw DegeneracyError("CoupledSystem: q_k = 0 below the low-mode cutoff");
        }
        precompute();
        g_sq_current_ = current_control().g_norm_sq;
    }

    const SolverState& base() const { return base_; }
    const SpectralField& omega() const { return base_.field(); }
    const SpectralField& xi() const { return xi_; }
    const SpectralField& zeta() const { return zeta_; }
    const SpectralField& malliavin() const { return malliavin_; }
    int n0() const { return n0_; }
    double t() const { return base_.t(); }
    double dt() const { return base_.params().dt; }

    /// Control force at the current (omega, zeta).
    ControlForce current_control() {
        eval_.set_base(base_.field());
        eval_.bs(zeta_, scratch_);
        return assemble_control(zeta_, scratch_, n0_, noise_, base_.params().lambda_factor);
    }

    /// One lockstep step of all four fields.
    void step() {
        const double dtv = dt();
        const SpectralField omega_n = base_.field();

        eval_.set_base(omega_n);
        eval_.bs(xi_, nl_xi_);
        eval_.bs(zeta_, nl_zeta_);
        eval_.bs(malliavin_, nl_d_);
        ControlForce ctrl_n =
            assemble_control(zeta_, nl_zeta_, n0_, noise_, base_.params().lambda_factor);
        fix_extinction_step(ctrl_n);
        for (std::size_t i = 0; i < nl_d_.mode_count(); ++i) nl_d_[i] += ctrl_n.f[i];

        // exact low-mode shrink of zeta (direction frozen)
        SpectralField zeta_next(zeta_.cutoff());
        const double znorm = low_mode_norm(zeta_, n0_);
        const double factor = znorm > 0.0 ? std::max(znorm - 0.5 * dtv, 0.0) / znorm : 0.0;
        for (std::size_t i = 0; i < zeta_.mode_count(); ++i)
            if (low_[i]) zeta_next[i] = factor * zeta_[i];

        // stage values
        SpectralField a_xi(xi_.cutoff()), a_d(xi_.cutoff()), zeta_stage(xi_.cutoff());
        for (std::size_t i = 0; i < xi_.mode_count(); ++i) {
            a_xi[i] = decay_[i] * xi_[i] + dtv * p1_[i] * nl_xi_[i];
            a_d[i] = decay_[i] * malliavin_[i] + dtv * p1_[i] * nl_d_[i];
            zeta_stage[i] = low_[i] ? zeta_next[i]
                                    : decay_[i] * zeta_[i] + dtv * p1_[i] * nl_zeta_[i];
        }

        base_.step();  // omega_n -> omega_{n+1} (exponential Euler-Maruyama)

        // Stage-2 transport at the zeta stage value. The stage-2 control is
        // evaluated here too (not at the completed zeta): the stage's high
        // modes coincide with the xi/D stages, which keeps the discrete
        // xi - D - zeta defect free of the O(dt^{3/2}) noise-increment term.
        eval_.set_base(base_.field());
        eval_.bs(zeta_stage, scratch_);
        const ControlForce ctrl_next =
            assemble_control(zeta_stage, scratch_, n0_, noise_, base_.params().lambda_factor);
        for (std::size_t i = 0; i < zeta_.mode_count(); ++i)
            if (!low_[i])
                zeta_next[i] = zeta_stage[i] + dtv * p2_[i] * (scratch_[i] - nl_zeta_[i]);
        zeta_ = std::move(zeta_next);

        eval_.bs(a_xi, scratch_);
        for (std::size_t i = 0; i < xi_.mode_count(); ++i)
            a_xi[i] += dtv * p2_[i] * (scratch_[i] - nl_xi_[i]);

        eval_.bs(a_d, scratch_);
        for (std::size_t i = 0; i < xi_.mode_count(); ++i) {
            const Complex nl_stage = scratch_[i] + ctrl_next.f[i];
            a_d[i] += dtv * p2_[i] * (nl_stage - nl_d_[i]);
        }
        xi_ = std::move(a_xi);
        malliavin_ = std::move(a_d);
        g_sq_prev_ = g_sq_current_;
        g_sq_current_ = ctrl_next.g_norm_sq;
    }

    double control_g_norm_sq() const { return g_sq_current_; }
    double previous_g_norm_sq() const { return g_sq_prev_; }

    /// Runs nsteps = round(T/dt) steps recording the L2/L3 diagnostics.
    CoupledRecord run(double T, std::uint64_t cadence = 1) {
        const std::uint64_t nsteps = static_cast<std::uint64_t>(std::llround(T / dt()));
        CoupledRecord rec;
        double int_g = 0.0;
        auto record = [&]() {
            rec.times.push_back(t());
            SpectralField diff = xi_;
            diff -= malliavin_;
            diff -= zeta_;
            const double mm = l2_norm(diff);
            const double scale = l2_norm(xi_) + l2_norm(zeta_);
            rec.mismatch.push_back(mm);
            rec.xi_norm.push_back(l2_norm(xi_));
            rec.zeta_norm_sq.push_back(std::pow(l2_norm(zeta_), 2));
            rec.zeta_low_norm.push_back(low_mode_norm(zeta_, n0_));
            rec.g_norm_sq.push_back(g_sq_current_);
            rec.int_g_sq.push_back(int_g);
            if (mm > rec.max_mismatch) rec.max_mismatch = mm;
            if (scale > rec.max_mismatch_scale) rec.max_mismatch_scale = scale;
        };
        record();
        for (std::uint64_t n = 0; n < nsteps; ++n) {
            step();
            int_g += 0.5 * dt() * (g_sq_prev_ + g_sq_current_);
            const bool last = (n + 1 == nsteps);
            if ((cadence != 0 && (n + 1) % cadence == 0 && !last) || last) record();
        }
        return rec;
    }

  private:
    static SolverParams make_base(SolverParams p) {
        p.kind = EquationKind::Lagrangian;
        return p;
    }

    /// On the single step where |ζ_N| crosses zero the constant shrink rate
    /// cannot represent the within-step kink: replace the shrink component
    /// of f by the per-mode value whose two-stage quadrature lands the
    /// controlled difference exactly on ζ_N(t+dt) = 0. The modified rate
    /// stays O(1)-bounded (|ζ_N| <= dt/2 here) and acts on one step only.
    void fix_extinction_step(ControlForce& ctrl) {
        const double znorm = low_mode_norm(zeta_, n0_);
        const double dtv = dt();
        if (!(znorm > 0.0) || znorm > 0.5 * dtv) return;
        for (std::size_t i = 0; i < zeta_.mode_count(); ++i) {
            if (!low_[i]) continue;
            const double z = base_.params().lambda_factor * zeta_.table()[i].norm2() * dtv;
            const double landing = (1.0 - z * p2_[i]) / (dtv * (p1_[i] - p2_[i]));
            // swap the (1/2)/|ζ_N| rate for the landing rate
            ctrl.f[i] += (landing - 0.5 / znorm) * zeta_[i];
            const double qk = noise_.q(i);
            ctrl.g[i] = ctrl.f[i] / qk;
        }
        ctrl.g_norm_sq = 0.0;
        for (std::size_t i = 0; i < zeta_.mode_count(); ++i)
            if (low_[i]) ctrl.g_norm_sq += 2.0 * std::norm(ctrl.g[i]);
    }

    void precompute() {
        const std::size_t m = xi_.mode_count();
        decay_.resize(m);
        p1_.resize(m);
        p2_.resize(m);
        low_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const Wavevector& k = xi_.table()[i];
            const double z = base_.params().lambda_factor * k.norm2() * dt();
            decay_[i] = std::exp(-z);
            p1_[i] = phi1(z);
            p2_[i] = phi2(z);
            low_[i] = k.norm2() < n0_ * n0_;
        }
    }

    SolverState base_;
    NoiseSpec noise_;
    SpectralField xi_;
    SpectralField zeta_;
    SpectralField malliavin_;
    int n0_;
    BsEvaluator eval_;
    SpectralField scratch_;
    SpectralField nl_xi_;
    SpectralField nl_zeta_;
    SpectralField nl_d_;
    double g_sq_current_ = 0.0;
    double g_sq_prev_ = 0.0;
    std::vector<double> decay_;
    std::vector<double> p1_;
    std::vector<double> p2_;
    std::vector<char> low_;
};

}  // namespace vortrace
