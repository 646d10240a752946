#pragma once

#include <string>
#include <vector>

#include "homogfc/cell_problems.hpp"

namespace homogfc {

using Mat2 = Eigen::Matrix2d;

/// Effective dispersion tensors at one macroscopic state (T0, C0).
/// Two independent evaluation routes are kept: the interface form (volume
/// gradient products plus surface coupling terms) and the divergence form
/// (auxiliary-potential route). The divergence form is the canonical output
/// because it is invariant under constant shifts of the correctors.
struct EffectiveTensors {
    Mat2 lambda;      // canonical (divergence form)
    Mat2 D;
    Mat2 lambda_alt;  // interface form, cross-check
    Mat2 D_alt;
    Mat2 L_sym;       // sym(lambda + Q D)
    double T0 = 0.0, C0 = 0.0;
    double form_discrepancy = 0.0;  // max relative difference of the routes
};

struct TensorPair {
    Mat2 lambda;
    Mat2 D;
};

TensorPair tensors_interface_form(const CellSolution& sol,
                                  const MaterialParams& p, double Q, double A);

TensorPair tensors_divergence_form(const CellSolution& sol,
                                   const AuxiliaryPotentials& aux,
                                   const MaterialParams& p);

/// L = lambda + Q D and its symmetrization; also evaluates the closed-form
/// symmetric combination directly from the cell fields and returns the
/// maximum absolute difference of the two routes (an algebraic identity).
struct SymTensorCheck {
    Mat2 L_sym;
    Mat2 L_sym_direct;
    double difference;
};
SymTensorCheck symmetric_part_tensor(const TensorPair& t,
                                     const CellSolution& sol,
                                     const MaterialParams& p, double Q,
                                     double A);

/// Coercivity / boundedness diagnostics: eigenvalues of the symmetric parts
/// against the theoretical lower and upper bounds. Violations are recorded,
/// not thrown.
struct CoercivityReport {
    double lam_min_eig, lam_lower_bound;
    double D_min_eig, D_lower_bound;
    double D_max_eig, D_upper_bound;  // upper: int_{Y_g} D
    bool lam_lower_ok, D_lower_ok, D_upper_ok, positive_definite;
    std::string to_json() const;
};
CoercivityReport coercivity_report(const TensorPair& t,
                                   const MaterialParams& p, double Q,
                                   const PeriodicMesh& mesh);

EffectiveTensors compute_effective_tensors(const MaterialParams& p,
                                           const KineticsParams& k,
                                           const PeriodicMesh& mesh,
                                           const VelocityField& field,
                                           const DriftPair& drifts,
                                           const AuxiliaryPotentials& aux,
                                           double T0, double C0);

/// Grid specification: T0 log-uniform, C0 uniform.
struct TableGrid {
    double T0_min = 0.5, T0_max = 2.0;
    int T0_points = 5;
    double C0_min = 0.0, C0_max = 1.0;
    int C0_points = 5;
};

struct TensorTable {
    TableGrid grid;
    std::vector<double> T0_nodes;  // ascending
    std::vector<double> C0_nodes;  // ascending
    std::vector<EffectiveTensors> nodes;  // row-major over (T0, C0)
    double c_eff = 0.0;
    double gas_fraction = 0.0;  // |Y_g| (quadrature-consistent)
    mutable long clamped_lookups = 0;  // incremented by out-of-range lookup()

    const EffectiveTensors& at(int it, int ic) const;
    /// Bilinear interpolation in (log T0, C0), clamped at the grid edges.
    TensorPair lookup(double T0, double C0) const;
};

/// Solves the cell problem at every grid node; any node whose symmetric
/// tensor parts fail positive definiteness aborts construction.
TensorTable build_tensor_table(const MaterialParams& p, const KineticsParams& k,
                               const PeriodicMesh& mesh,
                               const VelocityField& field,
                               const DriftPair& drifts,
                               const AuxiliaryPotentials& aux,
                               const TableGrid& grid);

}  // namespace homogfc
