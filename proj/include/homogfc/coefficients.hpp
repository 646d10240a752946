#pragma once

#include "homogfc/geometry.hpp"
#include "homogfc/mesh.hpp"
#include "homogfc/velocity.hpp"

namespace homogfc {

/// Per-subdomain material constants (the general y-dependent coefficients of
/// the model are restricted to subdomain constants; see README).
struct MaterialParams {
    double c_g = 1.0;       // gas volumetric heat capacity
    double c_s = 1.0;       // solid volumetric heat capacity
    double lambda_g = 1.0;  // gas conductivity
    double lambda_s = 1.0;  // solid conductivity
    double D = 1.0;         // molecular diffusivity (gas)
};

void validate_materials(const MaterialParams& p);

/// Effective drifts of the two moving frames and the effective heat capacity.
struct DriftPair {
    Vec2 b_T;
    Vec2 b_C;
    double c_eff;
};

/// c_eff = c_g |Y_g| + c_s |Y_s| from the analytic areas.
double effective_heat_capacity(const MaterialParams& p, const CellGeometry& g);

/// b_T = (c_g / c_eff) \int_{Y_g} b dy, b_C = (1/|Y_g|) \int_{Y_g} b dy.
/// The integral of b uses the mesh quadrature (sum of |K| b_K), so that the
/// compatibility residuals below vanish at the discrete level.
DriftPair effective_drifts(const MaterialParams& p, const PeriodicMesh& mesh,
                           const VelocityField& field);

/// Solvability residuals of the drift-centered right-hand sides:
///   r_T = | c_g \int_{Y_g} (b_T - b) + c_s \int_{Y_s} b_T |   (componentwise)
///   r_C = | \int_{Y_g} (b_C - b) |
/// Both vanish when the drifts come from effective_drifts.
struct CompatibilityResiduals {
    Vec2 r_T;
    Vec2 r_C;
    double max() const;
};

CompatibilityResiduals compatibility_residuals(const MaterialParams& p,
                                               const PeriodicMesh& mesh,
                                               const VelocityField& field,
                                               const DriftPair& drifts);

}  // namespace homogfc
