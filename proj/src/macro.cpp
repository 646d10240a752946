#include "homogfc/macro.hpp"

#include <Eigen/SparseLU>
#include <cmath>

#include "homogfc/errors.hpp"

namespace homogfc {

namespace {

// Q1 local stiffness on a square element of size h for a constant (possibly
// non-symmetric) tensor; 2x2 Gauss, exact for the bilinear basis. The result
// is independent of h in 2D.
using Mat4 = Eigen::Matrix4d;

Mat4 q1_local_stiffness(const Mat2& A) {
    static const double g0 = 0.5 - 0.5 / std::sqrt(3.0);
    static const double g1 = 0.5 + 0.5 / std::sqrt(3.0);
    Mat4 K = Mat4::Zero();
    for (double xi : {g0, g1}) {
        for (double eta : {g0, g1}) {
            // reference gradients of (1-xi)(1-eta), xi(1-eta), xi eta, (1-xi)eta
            const Vec2 grad[4] = {{-(1 - eta), -(1 - xi)},
                                  {1 - eta, -xi},
                                  {eta, xi},
                                  {-eta, 1 - xi}};
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    K(i, j) += 0.25 * grad[i].dot(A * grad[j]);
        }
    }
    return K;
}

struct GridOperator {
    SpMat M;  // (mass_coeff h^2 / dt) I + K(tensors)
    Eigen::SparseLU<SpMat> lu;
    std::vector<Mat2> tensors;  // per element, for cache comparison
    bool ready = false;

    void build(int N, double mass_over_dt, const std::vector<Mat2>& tens) {
        if (ready && tensors.size() == tens.size()) {
            bool same = true;
            for (size_t e = 0; e < tens.size(); ++e)
                if (tensors[e] != tens[e]) { same = false; break; }
            if (same) return;
        }
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(16 * static_cast<size_t>(N) * N + N * N);
        auto idx = [N](int i, int j) {
            return ((i % N + N) % N) + N * ((j % N + N) % N);
        };
        for (int j = 0; j < N; ++j) {
            for (int i = 0; i < N; ++i) {
                const int corner[4] = {idx(i, j), idx(i + 1, j),
                                       idx(i + 1, j + 1), idx(i, j + 1)};
                const Mat4 K = q1_local_stiffness(tens[i + N * j]);
                for (int a = 0; a < 4; ++a)
                    for (int b = 0; b < 4; ++b)
                        trips.emplace_back(corner[a], corner[b], K(a, b));
            }
        }
        for (int k = 0; k < N * N; ++k)
            trips.emplace_back(k, k, mass_over_dt);
        M.resize(N * N, N * N);
        M.setFromTriplets(trips.begin(), trips.end());
        lu.compute(M);
        if (lu.info() != Eigen::Success)
            throw NumericalError("macro step: factorization failed");
        tensors = tens;
        ready = true;
    }
};

MacroStepDiagnostics advance(MacroState& state, const std::vector<Mat2>& lam_e,
                             const std::vector<Mat2>& D_e, double c_eff,
                             double gas_fraction, double dt, GridOperator& opT,
                             GridOperator& opC) {
    const int N = state.N;
    const double h2 = state.hx() * state.hx();

    opT.build(N, c_eff * h2 / dt, lam_e);
    opC.build(N, gas_fraction * h2 / dt, D_e);

    const Vec T_old = state.T0, C_old = state.C0;
    state.T0 = opT.lu.solve((c_eff * h2 / dt) * T_old);
    state.C0 = opC.lu.solve((gas_fraction * h2 / dt) * C_old);
    if (opT.lu.info() != Eigen::Success || opC.lu.info() != Eigen::Success)
        throw NumericalError("macro step: linear solve failed");
    state.t += dt;

    MacroStepDiagnostics d;
    const double mass_old = C_old.sum(), mass_new = state.C0.sum();
    d.mass_C_rel_change =
        std::abs(mass_new - mass_old) / std::max(std::abs(mass_old), 1e-300);
    d.l2_T_ratio = state.T0.norm() / std::max(T_old.norm(), 1e-300);
    d.l2_C_ratio = state.C0.norm() / std::max(C_old.norm(), 1e-300);
    d.min_T = state.T0.minCoeff();
    d.min_C = state.C0.minCoeff();
    if (d.mass_C_rel_change > 1e-12)
        throw InvariantError("macro step: mass of C changed by relative " +
                             std::to_string(d.mass_C_rel_change));
    if (d.l2_T_ratio > 1.0 + 1e-12 || d.l2_C_ratio > 1.0 + 1e-12)
        throw InvariantError("macro step: L2 norm increased");
    if (!(d.min_T > 0.0))
        throw InvariantError("macro step: temperature lost positivity (min " +
                             std::to_string(d.min_T) + ")");
    if (d.min_C < -1e-10 * std::max(C_old.cwiseAbs().maxCoeff(), 1.0))
        throw InvariantError("macro step: concentration undershoot " +
                             std::to_string(d.min_C));
    return d;
}

std::vector<Mat2> element_tensors(const MacroState& s, const TensorTable& table,
                                  bool want_lambda, const Vec2& offset) {
    const int N = s.N;
    std::vector<Mat2> nodal(static_cast<size_t>(N) * N);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            const Vec2 x(s.hx() * i, s.hx() * j);
            const double T = s.T0[s.idx(i, j)];
            // the companion field is sampled in the other frame
            const double C = offset.isZero()
                                 ? s.C0[s.idx(i, j)]
                                 : interp_macro(s, s.C0, x + offset);
            // clamping is tolerated within a 10% margin of the table range;
            // beyond that the table no longer represents the state
            const double mT = 0.1 * (table.grid.T0_max - table.grid.T0_min);
            const double mC = 0.1 * (table.grid.C0_max - table.grid.C0_min);
            if (T < table.grid.T0_min - mT || T > table.grid.T0_max + mT ||
                C > table.grid.C0_max + mC)
                throw NumericalError(
                    "macro step: state (" + std::to_string(T) + ", " +
                    std::to_string(C) + ") left the tensor table range");
            const TensorPair tp = table.lookup(T, std::max(C, 0.0));
            nodal[i + N * j] = want_lambda ? tp.lambda : tp.D;
        }
    }
    std::vector<Mat2> elem(static_cast<size_t>(N) * N);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i)
            elem[i + N * j] = 0.25 * (nodal[s.idx(i, j)] + nodal[s.idx(i + 1, j)] +
                                      nodal[s.idx(i + 1, j + 1)] +
                                      nodal[s.idx(i, j + 1)]);
    return elem;
}

}  // namespace

double eval_profile(const ProfileSpec& p, const Vec2& x, double box) {
    if (p.kind == ProfileSpec::Kind::constant) return p.value;
    // periodically wrapped squared distance to the bump center
    double r2 = 0.0;
    for (int k = 0; k < 2; ++k) {
        double d = std::remainder(x[k] - p.center[k], box);
        r2 += d * d;
    }
    return p.floor + p.amplitude * std::exp(-r2 / (2.0 * p.width * p.width));
}

MacroState init_macro(int N, double box, const ProfileSpec& T_profile,
                      const ProfileSpec& C_profile) {
    if (N < 2) throw ConfigError("macro grid: N must be >= 2");
    if (!(box > 0.0)) throw ConfigError("macro grid: box size must be > 0");
    MacroState s;
    s.N = N;
    s.box = box;
    s.T0.resize(N * N);
    s.C0.resize(N * N);
    for (int j = 0; j < N; ++j) {
        for (int i = 0; i < N; ++i) {
            const Vec2 x(box * i / N, box * j / N);
            s.T0[i + N * j] = eval_profile(T_profile, x, box);
            s.C0[i + N * j] = eval_profile(C_profile, x, box);
        }
    }
    if (!(s.T0.minCoeff() > 0.0))
        throw ConfigError("initial temperature must be strictly positive");
    if (s.C0.minCoeff() < 0.0)
        throw ConfigError("initial concentration must be non-negative");
    return s;
}

MacroStepDiagnostics step_macro(MacroState& state, const TensorTable& table,
                                double c_eff, double gas_fraction, double dt,
                                const Vec2& frame_offset) {
    if (!(dt > 0.0)) throw ConfigError("macro step: dt must be > 0");
    GridOperator opT, opC;
    const long clamped0 = table.clamped_lookups;
    const auto lam_e = element_tensors(state, table, true, frame_offset);
    const auto D_e = element_tensors(state, table, false, -frame_offset);
    auto d = advance(state, lam_e, D_e, c_eff, gas_fraction, dt, opT, opC);
    d.clamped_lookups = table.clamped_lookups - clamped0;
    return d;
}

MacroStepDiagnostics step_macro_const(MacroState& state, const Mat2& lambda,
                                      const Mat2& D, double c_eff,
                                      double gas_fraction, double dt) {
    GridOperator opT, opC;
    const size_t ne = static_cast<size_t>(state.N) * state.N;
    return advance(state, std::vector<Mat2>(ne, lambda),
                   std::vector<Mat2>(ne, D), c_eff, gas_fraction, dt, opT, opC);
}

MacroTrajectory run_macro(MacroState initial, const TensorTable& table,
                          double c_eff, double gas_fraction, double dt,
                          double T_f, const std::vector<double>& snapshot_times,
                          const Vec2& drift_difference, bool frames_identified) {
    const long steps = std::lround(T_f / dt);
    if (steps < 0 || std::abs(steps * dt - T_f) > 1e-9 * std::max(T_f, dt))
        throw ConfigError("macro run: horizon must be a multiple of dt");

    MacroTrajectory traj;
    traj.snapshots.push_back(initial);
    std::vector<long> snap_steps;
    for (double t : snapshot_times) snap_steps.push_back(std::lround(t / dt));

    GridOperator opT, opC;  // persistent: refactors only when tensors change
    MacroState state = std::move(initial);
    for (long k = 0; k < steps; ++k) {
        const Vec2 offset = frames_identified
                                ? Vec2(Vec2::Zero())
                                : Vec2(drift_difference * state.t);
        const long clamped0 = table.clamped_lookups;
        const auto lam_e = element_tensors(state, table, true, offset);
        const auto D_e = element_tensors(state, table, false, -offset);
        traj.diagnostics.push_back(
            advance(state, lam_e, D_e, c_eff, gas_fraction, dt, opT, opC));
        traj.diagnostics.back().clamped_lookups =
            table.clamped_lookups - clamped0;
        for (long ss : snap_steps)
            if (ss == k + 1) traj.snapshots.push_back(state);
    }
    if (snap_steps.empty() && steps > 0) traj.snapshots.push_back(state);
    return traj;
}

double interp_macro(const MacroState& s, const Vec& field, const Vec2& x) {
    const int N = s.N;
    const double gx = x.x() / s.hx(), gy = x.y() / s.hx();
    const int i0 = static_cast<int>(std::floor(gx));
    const int j0 = static_cast<int>(std::floor(gy));
    const double fx = gx - std::floor(gx), fy = gy - std::floor(gy);
    const double v00 = field[s.idx(i0, j0)], v10 = field[s.idx(i0 + 1, j0)];
    const double v01 = field[s.idx(i0, j0 + 1)],
                 v11 = field[s.idx(i0 + 1, j0 + 1)];
    return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 +
           (1 - fx) * fy * v01 + fx * fy * v11;
}

}  // namespace homogfc
