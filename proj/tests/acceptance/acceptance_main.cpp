// Acceptance harness: one line per criterion, PASS or FAIL with the measured
// numbers. The process exits 0 when every criterion executed to completion;
// a FAIL line means the measured behavior misses its target, not a crash.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "homogfc/micro.hpp"
#include "homogfc/pipeline.hpp"
#include "homogfc/tensors.hpp"

using namespace homogfc;
using clk = std::chrono::steady_clock;

namespace {

int g_failures = 0;
int g_errors = 0;

double seconds_since(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

void report(int num, const std::string& title, bool pass,
            const std::string& detail) {
    if (!pass) ++g_failures;
    std::printf("criterion %d (%s): %s%s%s\n", num, title.c_str(),
                pass ? "PASS" : "FAIL", detail.empty() ? "" : " - ",
                detail.c_str());
    std::fflush(stdout);
}

void report_error(int num, const std::string& title, const std::string& what) {
    ++g_errors;
    std::printf("criterion %d (%s): ERROR - %s\n", num, title.c_str(),
                what.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

// ---- shared baseline configuration --------------------------------------

const MaterialParams kBaseMat{1.0, 2.0, 1.0, 2.0, 1.0};
const KineticsParams kBaseKin{1.0, 1.0, 0.5};

struct CellSetup {
    PeriodicMesh mesh;
    VelocityField field;
    DriftPair drifts;
    AuxiliaryPotentials aux;
};

CellSetup setup_cell(const CellGeometry& g, double h, const MaterialParams& p,
                     int velocity /*0 none, 1 cellular, 2 constant-mean*/) {
    CellSetup s;
    s.mesh = mesh_cell(g, h);
    switch (velocity) {
        case 1: s.field = make_cellular_velocity(s.mesh, 1.0); break;
        case 2: s.field = make_constant_velocity(s.mesh, Vec2(0.2, 0.0)); break;
        default: s.field = make_zero_velocity(s.mesh); break;
    }
    s.drifts = effective_drifts(p, s.mesh, s.field);
    s.aux = solve_auxiliary(p, s.mesh, s.field, s.drifts);
    return s;
}

// ---- criteria ------------------------------------------------------------

void criterion_1() {
    const char* title = "trivial-limit exactness";
    try {
        const auto t0 = clk::now();
        MaterialParams p{1.0, 1.0, 2.0, 2.0, 0.7};
        KineticsParams k{0.0, 1.0, 1.0};
        CellSetup s = setup_cell(make_empty_cell(), 0.1, p, 0);
        const EffectiveTensors t = compute_effective_tensors(
            p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
        const double err = std::max(
            (t.lambda - 2.0 * Mat2::Identity()).cwiseAbs().maxCoeff(),
            (t.D - 0.7 * Mat2::Identity()).cwiseAbs().maxCoeff());
        const double dt = seconds_since(t0);
        report(1, title, err <= 1e-12 && dt < 1.0,
               fmt("max tensor error %.2e (limit 1e-12), runtime %.2f s "
                   "(limit 1 s)", err, dt));
    } catch (const std::exception& e) {
        report_error(1, title, e.what());
    }
}

void criterion_2() {
    const char* title = "two-formula tensor equivalence";
    try {
        const auto t0 = clk::now();
        double worst = 0.0;
        std::string worst_cfg;
        int pass_count = 0, total = 0;
        for (int geom = 0; geom < 2; ++geom) {
            const CellGeometry g = geom == 0
                                       ? make_disk_cell(Vec2(0.5, 0.5), 0.25)
                                       : make_stripe_cell(0, 0.3);
            for (int vel = 0; vel < 2; ++vel) {
                for (double A : {0.0, 1.0}) {
                    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
                    KineticsParams k{A, 1.0, 0.5};
                    CellSetup s = setup_cell(g, 0.05, p, vel);
                    const EffectiveTensors t = compute_effective_tensors(
                        p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
                    ++total;
                    if (t.form_discrepancy <= 1e-8) ++pass_count;
                    if (t.form_discrepancy > worst) {
                        worst = t.form_discrepancy;
                        worst_cfg = fmt("%s, %s, A=%g",
                                        geom == 0 ? "disk" : "stripe",
                                        vel == 0 ? "b=0" : "b=cellular", A);
                    }
                }
            }
        }
        const double dt = seconds_since(t0);
        report(2, title, pass_count == total && dt < 120.0,
               fmt("%d/%d configurations within 1e-8; worst relative "
                   "discrepancy %.2e at [%s]; runtime %.1f s (limit 120 s)",
                   pass_count, total, worst, worst_cfg.c_str(), dt));
    } catch (const std::exception& e) {
        report_error(2, title, e.what());
    }
}

void criterion_3() {
    const char* title = "layered-medium oracle";
    try {
        const auto t0 = clk::now();
        MaterialParams p{1.0, 1.0, 1.0, 10.0, 1.0};
        KineticsParams k{0.0, 1.0, 1.0};
        CellSetup s = setup_cell(make_stripe_cell(0, 0.5), 0.02, p, 0);
        const EffectiveTensors t = compute_effective_tensors(
            p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
        const double harmonic = 20.0 / 11.0, arithmetic = 5.5;
        const double e11 = std::abs(t.lambda(0, 0) - harmonic) / harmonic;
        const double e22 = std::abs(t.lambda(1, 1) - arithmetic) / arithmetic;
        const double dt = seconds_since(t0);
        report(3, title, e11 <= 0.01 && e22 <= 0.01 && dt < 30.0,
               fmt("lambda11 = %.5f vs 20/11 (rel err %.2e), lambda22 = %.5f "
                   "vs 5.5 (rel err %.2e), runtime %.1f s (limit 30 s)",
                   t.lambda(0, 0), e11, t.lambda(1, 1), e22, dt));
    } catch (const std::exception& e) {
        report_error(3, title, e.what());
    }
}

void criterion_4() {
    const char* title = "drift compatibility residuals";
    try {
        double worst = 0.0;
        int n = 0;
        auto probe = [&worst, &n](const CellGeometry& g, int vel) {
            CellSetup s = setup_cell(g, 0.08, kBaseMat, vel);
            const CompatibilityResiduals r = compatibility_residuals(
                kBaseMat, s.mesh, s.field, s.drifts);
            worst = std::max(worst, r.max());
            ++n;
        };
        probe(make_empty_cell(), 0);
        probe(make_empty_cell(), 2);
        probe(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0);
        probe(make_disk_cell(Vec2(0.5, 0.5), 0.25), 1);
        probe(make_disk_cell(Vec2(0.5, 0.5), 0.25), 2);
        probe(make_disk_cell(Vec2(0.3, 0.6), 0.2), 1);
        probe(make_stripe_cell(0, 0.3), 0);
        probe(make_stripe_cell(0, 0.3), 1);
        probe(make_stripe_cell(1, 0.5), 0);
        report(4, title, worst <= 1e-10,
               fmt("max residual %.2e over %d geometry/velocity combinations "
                   "(limit 1e-10)", worst, n));
    } catch (const std::exception& e) {
        report_error(4, title, e.what());
    }
}

void criterion_5() {
    const char* title = "micro energy monitor";
    try {
        const PeriodicMesh cell =
            mesh_cell(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1);
        const VelocityField cf = make_constant_velocity(cell, Vec2(0.2, 0.0));
        const TiledMesh tiled = tile_mesh(cell, 4);
        const VelocityField tf = tile_velocity(tiled, cf);
        ProfileSpec Tp, Cp;
        Tp.kind = ProfileSpec::Kind::gaussian;
        Tp.floor = 1.0;
        Tp.amplitude = 0.5;
        Tp.width = 0.12;
        Cp = Tp;
        Cp.floor = 0.5;
        Cp.amplitude = 0.3;
        const MicroRun run = run_micro(tiled, tf, kBaseMat, kBaseKin, 2.5e-4,
                                       0.05, Tp, Cp, {0.05});
        double worst_energy = 0.0, worst_skew = 0.0;
        for (const MicroStepReport& r : run.steps) {
            worst_energy = std::max(worst_energy, r.energy_residual);
            worst_skew = std::max(worst_skew, r.convection_skewness);
        }
        report(5, title, worst_energy <= 1e-8 && worst_skew <= 1e-8,
               fmt("max energy-identity defect %.2e, max convection skewness "
                   "%.2e over %zu steps (limits 1e-8)",
                   worst_energy, worst_skew, run.steps.size()));
    } catch (const std::exception& e) {
        report_error(5, title, e.what());
    }
}

void criterion_6() {
    const char* title = "micro/macro convergence in epsilon";
    try {
        const auto t0 = clk::now();
        const PeriodicMesh cell =
            mesh_cell(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1);
        const VelocityField field =
            make_constant_velocity(cell, Vec2(0.2, 0.0));
        const DriftPair drifts = effective_drifts(kBaseMat, cell, field);
        const AuxiliaryPotentials aux =
            solve_auxiliary(kBaseMat, cell, field, drifts);
        TableGrid grid{0.8, 2.0, 4, 0.0, 1.0, 4};
        const TensorTable table = build_tensor_table(kBaseMat, kBaseKin, cell,
                                                     field, drifts, aux, grid);

        ProfileSpec Tp, Cp;
        Tp.kind = ProfileSpec::Kind::gaussian;
        Tp.floor = 1.0;
        Tp.amplitude = 0.5;
        Tp.width = 0.12;
        Cp = Tp;
        Cp.floor = 0.5;
        Cp.amplitude = 0.3;

        const double Tf = 0.05;
        std::vector<double> snaps;
        for (int s = 1; s <= 5; ++s) snaps.push_back(Tf * s / 5);
        const MacroState m0 = init_macro(64, 1.0, Tp, Cp);
        const MacroTrajectory macro =
            run_macro(m0, table, drifts.c_eff, table.gas_fraction, 5e-4, Tf,
                      snaps, drifts.b_T - drifts.b_C, false);

        // references pinned from the first verified run of this build
        const double ref_T[3] = {0.079429, 0.162870, 0.177392};
        const double ref_C[3] = {0.213287, 0.434338, 0.472863};
        double rho_T[3], rho_C[3];
        int i = 0;
        for (int n : {4, 8, 16}) {
            const TiledMesh tiled = tile_mesh(cell, n);
            const VelocityField tf = tile_velocity(tiled, field);
            const MicroRun run = run_micro(tiled, tf, kBaseMat, kBaseKin,
                                           2.5e-4, Tf, Tp, Cp, snaps);
            const FrameErrorRecord rec =
                moving_frame_error(run, macro, drifts, tiled.epsilon());
            rho_T[i] = rec.rho_T.back();
            rho_C[i] = rec.rho_C.back();
            ++i;
        }
        const bool decreasing = rho_T[0] > rho_T[1] && rho_T[1] > rho_T[2] &&
                                rho_C[0] > rho_C[1] && rho_C[1] > rho_C[2];
        double ref_dev = 0.0;
        for (int j = 0; j < 3; ++j)
            ref_dev = std::max(
                {ref_dev, std::abs(rho_T[j] - ref_T[j]) / ref_T[j],
                 std::abs(rho_C[j] - ref_C[j]) / ref_C[j]});
        const double dt = seconds_since(t0);
        report(6, title, decreasing && dt <= 900.0,
               fmt("rho_T = {%.4f, %.4f, %.4f}, rho_C = {%.4f, %.4f, %.4f} "
                   "for eps = {1/4, 1/8, 1/16}: %s; max deviation from pinned "
                   "references %.1e%%; runtime %.0f s (limit 900 s)",
                   rho_T[0], rho_T[1], rho_T[2], rho_C[0], rho_C[1], rho_C[2],
                   decreasing ? "strictly decreasing" : "NOT decreasing",
                   100.0 * ref_dev, dt));
    } catch (const std::exception& e) {
        report_error(6, title, e.what());
    }
}

void criterion_7() {
    const char* title = "macro heat-kernel oracle";
    try {
        // dT/dt = lap T with an exact periodized Gaussian; C rides along to
        // monitor per-step mass conservation
        const int N = 128;
        const double dt = 1e-4, t_end = 0.1;
        const double s0 = 0.01;  // sigma0^2
        auto wrapped = [&](double x, double y, double var) {
            double v = 0.0;
            for (int kx = -6; kx <= 6; ++kx)
                for (int ky = -6; ky <= 6; ++ky) {
                    const double dx = x - 0.5 - kx, dy = y - 0.5 - ky;
                    v += std::exp(-(dx * dx + dy * dy) / (2.0 * var));
                }
            return v;
        };
        ProfileSpec one;
        one.kind = ProfileSpec::Kind::constant;
        one.value = 1.0;
        MacroState s = init_macro(N, 1.0, one, one);
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                s.T0[s.idx(i, j)] =
                    1.0 + wrapped(double(i) / N, double(j) / N, s0);
                s.C0[s.idx(i, j)] =
                    0.2 + 0.5 * wrapped(double(i) / N, double(j) / N, s0);
            }
        const int steps = static_cast<int>(std::round(t_end / dt));
        double worst_mass = 0.0;
        for (int k = 0; k < steps; ++k) {
            const MacroStepDiagnostics d = step_macro_const(
                s, Mat2::Identity(), 0.5 * Mat2::Identity(), 1.0, 1.0, dt);
            worst_mass = std::max(worst_mass, std::abs(d.mass_C_rel_change));
        }
        const double var_t = s0 + 2.0 * t_end;
        double err2 = 0.0;
        for (int j = 0; j < N; ++j)
            for (int i = 0; i < N; ++i) {
                const double exact =
                    1.0 + (s0 / var_t) *
                              wrapped(double(i) / N, double(j) / N, var_t);
                const double d = s.T0[s.idx(i, j)] - exact;
                err2 += d * d;
            }
        const double l2 = std::sqrt(err2 / (N * N));
        report(7, title, l2 <= 1e-3 && worst_mass <= 1e-12,
               fmt("L2 error %.2e at t = %.1f (limit 1e-3); max per-step "
                   "relative mass drift of C %.1e (limit 1e-12)",
                   l2, t_end, worst_mass));
    } catch (const std::exception& e) {
        report_error(7, title, e.what());
    }
}

void criterion_8() {
    const char* title = "coercivity of the tensor table";
    try {
        const PeriodicMesh cell =
            mesh_cell(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.08);
        const VelocityField field =
            make_constant_velocity(cell, Vec2(0.2, 0.0));
        const DriftPair drifts = effective_drifts(kBaseMat, cell, field);
        const AuxiliaryPotentials aux =
            solve_auxiliary(kBaseMat, cell, field, drifts);
        TableGrid grid{0.8, 2.0, 3, 0.0, 1.0, 3};
        const TensorTable table = build_tensor_table(kBaseMat, kBaseKin, cell,
                                                     field, drifts, aux, grid);
        bool pd = true, upper = true;
        int lower_viol = 0;
        double worst_lower_gap = 0.0;
        for (const EffectiveTensors& node : table.nodes) {
            TensorPair t{node.lambda, node.D};
            const CoercivityReport r =
                coercivity_report(t, kBaseMat, kBaseKin.Q, cell);
            pd = pd && r.positive_definite;
            upper = upper && r.D_upper_ok;
            if (!r.lam_lower_ok || !r.D_lower_ok) {
                ++lower_viol;
                worst_lower_gap = std::max(
                    {worst_lower_gap, r.lam_lower_bound - r.lam_min_eig,
                     r.D_lower_bound - r.D_min_eig});
            }
        }
        report(8, title, pd && upper,
               fmt("positive definiteness %s and upper bound %s across %zu "
                   "nodes (asserted); lower bounds violated at %d node(s), "
                   "worst gap %.2e (reported as a finding, not asserted)",
                   pd ? "hold" : "FAIL", upper ? "holds" : "FAILS",
                   table.nodes.size(), lower_viol, worst_lower_gap));
    } catch (const std::exception& e) {
        report_error(8, title, e.what());
    }
}

void criterion_9() {
    const char* title = "kinetics property suite";
    try {
        const auto t0 = clk::now();
        const double Ta = 1.3;
        bool ok = true;
        std::string why;
        double prev = -1.0;
        for (int i = 1; i <= 2000; ++i) {
            const double T = 5e-3 * i;
            const double f = arrhenius_f(T, Ta);
            if (!(f >= 0.0 && f < 1.0)) { ok = false; why = "range"; }
            if (f < prev) { ok = false; why = "monotonicity"; }
            prev = f;
            // exponentiation chain f^n <= f on (0, 1)
            double p = f;
            for (int n = 2; n <= 5; ++n) {
                p *= f;
                if (p > f + 1e-15) { ok = false; why = "chain"; }
            }
            // derivative vs central difference
            if (T > 0.1) {
                const double eps = 1e-6;
                const double fd = (arrhenius_f(T + eps, Ta) -
                                   arrhenius_f(T - eps, Ta)) / (2.0 * eps);
                if (std::abs(fd - arrhenius_df(T, Ta)) > 1e-6) {
                    ok = false;
                    why = "derivative";
                }
            }
        }
        if (arrhenius_f(0.0, Ta) != 0.0) { ok = false; why = "f(0)"; }
        const double dt = seconds_since(t0);
        report(9, title, ok && dt < 5.0,
               ok ? fmt("monotone, range [0,1), chain and derivative checks "
                        "over 2000 samples; runtime %.2f s (limit 5 s)", dt)
                  : "violated: " + why);
    } catch (const std::exception& e) {
        report_error(9, title, e.what());
    }
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    std::printf("summary: %d of 9 criteria passed, %d failed, %d errored\n",
                9 - g_failures - g_errors, g_failures, g_errors);
    // FAIL lines are honest measurements and do not abort the suite; only a
    // criterion that could not execute at all is treated as a harness error.
    return g_errors == 0 ? 0 : 1;
}
