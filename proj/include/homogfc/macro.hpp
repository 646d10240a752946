#pragma once

#include <functional>
#include <vector>

#include "homogfc/tensors.hpp"

namespace homogfc {

/// Nodal fields on an N x N periodic grid over [0, box)^2; node (i,j) sits
/// at (box i/N, box j/N) and index i + N j. Each field lives in its own
/// moving frame (the frames of the two effective drifts); see step_macro.
struct MacroState {
    int N = 0;
    double box = 1.0;
    Vec T0, C0;
    double t = 0.0;

    double hx() const { return box / N; }
    int idx(int i, int j) const {
        i %= N; if (i < 0) i += N;
        j %= N; if (j < 0) j += N;
        return i + N * j;
    }
};

/// Initial profile: constant or a periodically wrapped Gaussian bump over a
/// floor value.
struct ProfileSpec {
    enum class Kind { constant, gaussian } kind = Kind::constant;
    double value = 1.0;      // constant
    Vec2 center{0.5, 0.5};   // gaussian
    double width = 0.1;
    double amplitude = 1.0;
    double floor = 0.0;
};

double eval_profile(const ProfileSpec& p, const Vec2& x, double box);

/// Samples the profiles at the grid nodes; enforces T0 > 0 and C0 >= 0.
MacroState init_macro(int N, double box, const ProfileSpec& T_profile,
                      const ProfileSpec& C_profile);

struct MacroStepDiagnostics {
    double mass_C_rel_change = 0.0;  // must stay at roundoff
    double l2_T_ratio = 1.0;         // ||T_new|| / ||T_old||, <= 1
    double l2_C_ratio = 1.0;
    double min_T = 0.0, min_C = 0.0;
    long clamped_lookups = 0;
};

/// One backward-Euler step with lagged (Picard) tensor coefficients looked up
/// from the table at the previous state. Q1 elements with lumped mass, so
/// the mass of C0 is conserved exactly and both L2 norms are non-increasing.
/// `frame_offset` is the displacement (b_T - b_C) t between the two moving
/// frames: tensors for the temperature equation evaluate the concentration
/// at the frame-shifted location (empty offset = identified frames).
MacroStepDiagnostics step_macro(MacroState& state, const TensorTable& table,
                                double c_eff, double gas_fraction, double dt,
                                const Vec2& frame_offset = Vec2::Zero());

/// Fixed-coefficient variant used by oracles and by A = 0 runs.
MacroStepDiagnostics step_macro_const(MacroState& state, const Mat2& lambda,
                                      const Mat2& D, double c_eff,
                                      double gas_fraction, double dt);

struct MacroTrajectory {
    std::vector<MacroState> snapshots;
    std::vector<MacroStepDiagnostics> diagnostics;  // one per step
};

/// Advances to horizon T_f with uniform dt, snapshotting at the requested
/// times (plus the initial state).
MacroTrajectory run_macro(MacroState initial, const TensorTable& table,
                          double c_eff, double gas_fraction, double dt,
                          double T_f, const std::vector<double>& snapshot_times,
                          const Vec2& drift_difference = Vec2::Zero(),
                          bool frames_identified = true);

/// Periodic bilinear interpolation of a nodal grid field.
double interp_macro(const MacroState& s, const Vec& field, const Vec2& x);

}  // namespace homogfc
