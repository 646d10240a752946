#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <string>
#include <vector>

#include "homogfc/mesh.hpp"

namespace homogfc {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

struct VelocityField;  // velocity.hpp

/// P1 space on the periodic mesh, restricted to a subdomain. Degrees of
/// freedom live on canonical (periodic-representative) vertices.
struct FeSpace {
    const PeriodicMesh* mesh = nullptr;
    std::vector<int> dof;  // per vertex id (through rep); -1 if outside
    int n = 0;
    int domain = -1;  // -1 = whole cell, 0 = gas only
    Vec weight;       // w_i = integral of basis function phi_i over the domain

    int dof_of(int vertex) const { return dof[mesh->rep[vertex]]; }
    bool covers(int tri_domain) const {
        return domain < 0 || tri_domain == domain;
    }
};

FeSpace make_space_full(const PeriodicMesh& mesh);
FeSpace make_space_gas(const PeriodicMesh& mesh);

/// Element geometry: area and constant gradients of the three P1 basis
/// functions.
struct TriGeom {
    double area;
    std::array<Vec2, 3> grad;
};
TriGeom tri_geom(const PeriodicMesh& mesh, int t);

/// Stiffness \int coeff grad u . grad v over the covered subdomains.
/// coeff_gas / coeff_solid of 0 skip the respective subdomain.
SpMat assemble_stiffness(const FeSpace& space, double coeff_gas,
                         double coeff_solid);

/// Consistent mass matrix over the covered subdomains.
SpMat assemble_mass(const FeSpace& space, double coeff_gas, double coeff_solid);

/// Convection \int coeff (b . grad u) v over gas triangles, non-divergence
/// form. The field must satisfy the VelocityField invariants.
SpMat assemble_convection(const FeSpace& space, const VelocityField& field,
                          double coeff);

/// Interface mass \int_Gamma u v dsigma; rows in `row_space`, columns in
/// `col_space` (both spaces contain the interface vertices). Returns the zero
/// operator when Gamma is empty.
SpMat assemble_interface_mass(const FeSpace& row_space, const FeSpace& col_space);

/// Interface mass weighted by a P1 nodal coefficient g on the row space:
/// \int_Gamma g u v dsigma (2-point Gauss, exact for the cubic integrand).
SpMat assemble_interface_mass_weighted(const FeSpace& row_space,
                                       const FeSpace& col_space,
                                       const Vec& g_row);

/// Load vector \int f phi_i with f piecewise constant per triangle.
Vec assemble_load_p0(const FeSpace& space, const std::vector<double>& f_tri);

/// Solve A x = rhs where A has the constants in its kernel; the solution is
/// normalized to zero weighted mean via a scalar Lagrange multiplier.
/// Throws NumericalError if rhs is incompatible: |1^T rhs| > 1e-10 times
/// max(||rhs||, scale), where `scale` lets callers pass the absolute size of
/// the assembly contributions so analytically-zero loads are not rejected
/// for their roundoff remainder.
Vec solve_zero_mean(const SpMat& A, const FeSpace& space, const Vec& rhs,
                    double scale = 0.0);

/// Direct sparse solve (LU); throws NumericalError on failure.
Vec lu_solve(const SpMat& A, const Vec& rhs);

/// Debug dump in matrix-market coordinate format.
void write_operator(const std::string& path, const SpMat& A);

/// Nodal interpolation u(p) of a P1 dof vector, with subdomain selection.
double eval_p1(const FeSpace& space, const Vec& u, int tri, const Vec2& p);

/// Per-triangle gradient of a P1 dof vector.
Vec2 grad_p1(const FeSpace& space, const Vec& u, int tri);

}  // namespace homogfc
