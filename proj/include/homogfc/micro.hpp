#pragma once

#include <vector>

#include "homogfc/cell_problems.hpp"
#include "homogfc/macro.hpp"

namespace homogfc {

/// The unit torus meshed as an n x n tiling of the cell mesh (epsilon = 1/n),
/// so there is no geometric approximation error between the scales.
/// vertex_map[tile][cell_vertex] gives the global vertex id, tile = ti + n*tj.
struct TiledMesh {
    PeriodicMesh mesh;
    int n = 0;
    std::vector<std::vector<int>> vertex_map;

    double epsilon() const { return 1.0 / n; }
};

TiledMesh tile_mesh(const PeriodicMesh& cell, int n);

/// Velocity b(x/eps) on the tiled mesh: the stream function transfers as
/// psi_cell / n, which reproduces the cell's triangle velocities exactly and
/// preserves every field invariant.
VelocityField tile_velocity(const TiledMesh& tiled,
                            const VelocityField& cell_field);

/// Per-step balance bookkeeping. `energy_residual` is the defect of the
/// exact discrete energy identity (tested with the new iterates), relative
/// to the size of its terms; `convection_skewness` is the relative energy
/// contribution of the two convection operators, which vanishes for a
/// stream-function velocity.
struct MicroStepReport {
    double energy_residual = 0.0;
    double convection_skewness = 0.0;
    double solve_residual = 0.0;
    double min_T = 0.0, min_C = 0.0;
    double reaction_factor_change = 0.0;  // max relative change of f(T) nodal
};

struct MicroRun {
    const TiledMesh* tiled = nullptr;
    FeSpace full, gas;
    std::vector<double> times;  // snapshot times, starting with 0
    std::vector<Vec> T_snap, C_snap;
    std::vector<MicroStepReport> steps;
};

/// Semi-implicit time stepping of the pore-scale system on the torus:
/// diffusion and the 1/eps convection are implicit; the interface reaction
/// is linear in the new concentration with the Arrhenius factor lagged one
/// step. Initial data sample the given profiles at the mesh nodes.
MicroRun run_micro(const TiledMesh& tiled, const VelocityField& tiled_field,
                   const MaterialParams& p, const KineticsParams& k, double dt,
                   double T_f, const ProfileSpec& T_init,
                   const ProfileSpec& C_init,
                   const std::vector<double>& snapshot_times);

/// Moving-frame discrepancy between a micro run and a macro trajectory:
/// rho_T(t) = || T_eps(t,.) - T0(t, . - b_T t/eps) ||_L2 over the torus,
/// rho_C likewise with b_C over the gas subdomain; the shifted macro field
/// is interpolated with periodic wrapping. Snapshot times must match.
struct FrameErrorRecord {
    std::vector<double> times;
    std::vector<double> rho_T, rho_C;
    double int_rho_T_sq = 0.0;  // trapezoid in time of rho^2
    double int_rho_C_sq = 0.0;
};

FrameErrorRecord moving_frame_error(const MicroRun& micro,
                                    const MacroTrajectory& macro,
                                    const DriftPair& drifts, double epsilon);

}  // namespace homogfc
