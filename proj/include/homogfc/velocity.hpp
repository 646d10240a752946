#pragma once

#include <vector>

#include "homogfc/fem.hpp"
#include "homogfc/mesh.hpp"

namespace homogfc {

/// Incompressible gas velocity on the cell, stored as a constant part plus
/// the curl of a P1 stream function:
///
///     b|_K = mean + (d2 psi, -d1 psi)|_K        on gas triangles,
///     b|_K = 0                                  on solid triangles.
///
/// The stream function is periodic and equals the affine function
/// mean.y * y1 - mean.x * y2 on every solid and interface vertex, so
/// div b = 0 holds weakly against every periodic test function and b.n = 0
/// holds edge-by-edge on Gamma -- both exactly, not just to discretization
/// accuracy. `mean` equals the integral of b over the whole cell.
struct VelocityField {
    const PeriodicMesh* mesh = nullptr;
    Vec2 mean{0.0, 0.0};
    Vec stream;  // per vertex, periodically consistent

    Vec2 value(int tri) const;
    double max_norm() const;
};

VelocityField make_zero_velocity(const PeriodicMesh& mesh);

/// Field with prescribed cell-integral `mean`, zero in the solid, and as
/// close to constant in the gas as the incompressibility constraints allow
/// (Dirichlet-energy-minimal stream around the inclusion). A stripe blocks
/// flow across it: a nonzero mean component along the stripe normal is
/// rejected.
VelocityField make_constant_velocity(const PeriodicMesh& mesh, const Vec2& mean);

/// Zero-mean cellular (vortex-array) flow, stream amp/(2pi) sin(2pi y1)
/// sin(2pi y2), tapered smoothly to zero near the inclusion.
VelocityField make_cellular_velocity(const PeriodicMesh& mesh, double amplitude);

/// L2-best divergence-free representation of a raw per-vertex velocity
/// sample. A field that already satisfies all invariants is reproduced
/// exactly (up to roundoff), so the projection is idempotent.
VelocityField project_divergence_free(const PeriodicMesh& mesh,
                                      const std::vector<Vec2>& raw_nodal);
VelocityField project_divergence_free(const VelocityField& field);

/// Max norm of the weak-divergence residual vector
/// r_i = sum_K |K| b_K . grad phi_i over gas test functions.
double weak_divergence_residual(const VelocityField& field);

/// Max over interface edges of |b_gas . n|.
double max_interface_normal_flux(const VelocityField& field);

/// Checks the invariants (periodic stream, weak divergence, interface flux,
/// zero solid velocity); throws InvariantError on violation.
void validate_velocity(const VelocityField& field);

}  // namespace homogfc
