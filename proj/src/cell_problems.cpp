#include "homogfc/cell_problems.hpp"

#include <cmath>
#include <vector>

#include "homogfc/errors.hpp"

namespace homogfc {

namespace {

/// Load vector of the drift-centered source plus the flux of the unit
/// direction e_j moved to the right-hand side:
///   F_i = int src . e_j phi_i  -  int coeff e_j . grad phi_i
/// with src piecewise constant per triangle.
Vec drift_load(const FeSpace& space, int j, const std::vector<Vec2>& src_tri,
               double flux_gas, double flux_solid, double& abs_scale) {
    const PeriodicMesh& mesh = *space.mesh;
    Vec F = Vec::Zero(space.n);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!space.covers(tri.domain)) continue;
        const TriGeom g = tri_geom(mesh, t);
        const double third = g.area / 3.0;
        const double flux = tri.domain == 0 ? flux_gas : flux_solid;
        for (int i = 0; i < 3; ++i) {
            const int d = space.dof_of(tri.v[i]);
            const double v = third * src_tri[t][j] - flux * g.area * g.grad[i][j];
            F[d] += v;
            abs_scale += std::abs(third * src_tri[t][j]) +
                         std::abs(flux * g.area * g.grad[i][j]);
        }
    }
    return F;
}

}  // namespace

AuxiliaryPotentials solve_auxiliary(const MaterialParams& p,
                                    const PeriodicMesh& mesh,
                                    const VelocityField& field,
                                    const DriftPair& drifts) {
    const auto res = compatibility_residuals(p, mesh, field, drifts);
    if (res.max() > 1e-10)
        throw NumericalError(
            "auxiliary potentials: drift compatibility residual " +
            std::to_string(res.max()) +
            "; the drifts do not match the velocity field");

    AuxiliaryPotentials aux;
    aux.full = make_space_full(mesh);
    aux.gas = make_space_gas(mesh);

    const int nt = static_cast<int>(mesh.triangles.size());
    std::vector<Vec2> srcT(nt), srcC(nt);
    for (int t = 0; t < nt; ++t) {
        if (mesh.triangles[t].domain == 0) {
            const Vec2 b = field.value(t);
            srcT[t] = p.c_g * (drifts.b_T - b);
            srcC[t] = drifts.b_C - b;
        } else {
            srcT[t] = p.c_s * drifts.b_T;
            srcC[t] = Vec2::Zero();
        }
    }

    const SpMat Kfull = assemble_stiffness(aux.full, 1.0, 1.0);
    const SpMat Kgas = assemble_stiffness(aux.gas, 1.0, 0.0);
    // The sources are differences of drift and velocity; when they cancel
    // analytically the roundoff left over must be measured against the
    // pre-cancellation magnitudes, not against the (tiny) result.
    const double magT = std::max(std::abs(p.c_g), std::abs(p.c_s)) *
                        (drifts.b_T.norm() + field.max_norm());
    const double magC = drifts.b_C.norm() + field.max_norm();
    for (int i = 0; i < 2; ++i) {
        double sT = 0.0, sC = 0.0;
        const Vec FT = drift_load(aux.full, i, srcT, 0.0, 0.0, sT);
        const Vec FC = drift_load(aux.gas, i, srcC, 0.0, 0.0, sC);
        aux.Pi[i] = solve_zero_mean(Kfull, aux.full, FT, std::max(sT, magT));
        aux.Sigma[i] = solve_zero_mean(Kgas, aux.gas, FC, std::max(sC, magC));
    }
    return aux;
}

CellSolution solve_cell_problems_a(const MaterialParams& p, double Q, double A,
                                   double a1, double a2,
                                   const PeriodicMesh& mesh,
                                   const VelocityField& field,
                                   const DriftPair& drifts) {
    const auto res = compatibility_residuals(p, mesh, field, drifts);
    if (res.max() > 1e-10)
        throw NumericalError("cell problems: drift compatibility residual " +
                             std::to_string(res.max()));

    CellSolution sol;
    sol.full = make_space_full(mesh);
    sol.gas = make_space_gas(mesh);
    sol.a1 = a1;
    sol.a2 = a2;
    const int nY = sol.full.n, ng = sol.gas.n;

    const int nt = static_cast<int>(mesh.triangles.size());
    std::vector<Vec2> srcT(nt), srcC(nt);
    for (int t = 0; t < nt; ++t) {
        if (mesh.triangles[t].domain == 0) {
            const Vec2 b = field.value(t);
            srcT[t] = p.c_g * (drifts.b_T - b);
            srcC[t] = drifts.b_C - b;
        } else {
            srcT[t] = p.c_s * drifts.b_T;
            srcC[t] = Vec2::Zero();
        }
    }

    // Heat block on Y; mass block on Y_g (the mass row divided by Q,
    // so the left kernel is tested by (1, Q 1)).
    SpMat Ahh = assemble_stiffness(sol.full, p.lambda_g, p.lambda_s);
    Ahh = Ahh + assemble_convection(sol.full, field, p.c_g);
    SpMat Amm = assemble_stiffness(sol.gas, p.D, 0.0);
    Amm = Amm + assemble_convection(sol.gas, field, 1.0);

    const bool coupled = A > 0.0 && (a1 != 0.0 || a2 != 0.0);
    SpMat Ahm, Amh;
    if (coupled && mesh.interface_edges.size() > 0) {
        const SpMat Ghh = assemble_interface_mass(sol.full, sol.full);
        const SpMat Ghm = assemble_interface_mass(sol.full, sol.gas);
        const SpMat Gmh = assemble_interface_mass(sol.gas, sol.full);
        const SpMat Gmm = assemble_interface_mass(sol.gas, sol.gas);
        Ahh = Ahh - (Q * A * a1) * Ghh;
        Ahm = -(Q * A * a2) * Ghm;
        Amh = (A * a1) * Gmh;
        Amm = Amm + (A * a2) * Gmm;
    }

    for (int j = 0; j < 2; ++j) {
        double abs_h = 0.0, abs_m = 0.0;
        const Vec Fh =
            drift_load(sol.full, j, srcT, p.lambda_g, p.lambda_s, abs_h);
        const Vec Fm = drift_load(sol.gas, j, srcC, p.D, 0.0, abs_m);
        const double scale = std::max(
            {std::sqrt(Fh.squaredNorm() + Fm.squaredNorm()), abs_h + abs_m,
             1e-30});

        if (!coupled || mesh.interface_edges.empty()) {
            // decoupled: two independent zero-mean solves
            if (std::abs(Fh.sum()) > 1e-10 * scale ||
                std::abs(Fm.sum()) > 1e-10 * scale)
                throw NumericalError(
                    "cell problems: right-hand side incompatible (1^T F = " +
                    std::to_string(Fh.sum()) + ", " + std::to_string(Fm.sum()) +
                    ")");
            sol.chi[j] = solve_zero_mean(Ahh, sol.full, Fh, abs_h);
            sol.omega[j] = solve_zero_mean(Amm, sol.gas, Fm, abs_m);
            const double r = std::sqrt((Ahh * sol.chi[j] - Fh).squaredNorm() +
                                       (Amm * sol.omega[j] - Fm).squaredNorm());
            sol.residual = std::max(sol.residual, r / scale);
            continue;
        }

        // coupled monolithic system with one scalar multiplier: the kernel is
        // the single constant direction (a2, -a1); testing with the left
        // kernel (1, Q 1) shows the multiplier vanishes for compatible data,
        // so the constraint (zero mean of chi) does not pollute the residual.
        const double compat = Fh.sum() + Q * Fm.sum();
        if (std::abs(compat) > 1e-10 * scale)
            throw NumericalError(
                "cell problems: coupled right-hand side incompatible, "
                "1^T F_T + Q 1^T F_C = " + std::to_string(compat));

        const int n = nY + ng + 1;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(Ahh.nonZeros() + Amm.nonZeros() + Ahm.nonZeros() +
                      Amh.nonZeros() + 2 * n);
        auto add_block = [&trips](const SpMat& M, int r0, int c0) {
            for (int k = 0; k < M.outerSize(); ++k)
                for (SpMat::InnerIterator it(M, k); it; ++it)
                    trips.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
        };
        add_block(Ahh, 0, 0);
        add_block(Ahm, 0, nY);
        add_block(Amh, nY, 0);
        add_block(Amm, nY, nY);
        for (int i = 0; i < nY; ++i) {
            trips.emplace_back(i, n - 1, sol.full.weight[i]);  // column
            trips.emplace_back(n - 1, i, sol.full.weight[i]);  // constraint
        }
        for (int i = 0; i < ng; ++i)
            trips.emplace_back(nY + i, n - 1, Q * sol.gas.weight[i]);
        SpMat aug(n, n);
        aug.setFromTriplets(trips.begin(), trips.end());

        Vec F(n);
        F.head(nY) = Fh;
        F.segment(nY, ng) = Fm;
        F[n - 1] = 0.0;
        const Vec x = lu_solve(aug, F);
        sol.chi[j] = x.head(nY);
        sol.omega[j] = x.segment(nY, ng);

        const double r =
            std::sqrt((Ahh * sol.chi[j] + Ahm * sol.omega[j] - Fh).squaredNorm() +
                      (Amh * sol.chi[j] + Amm * sol.omega[j] - Fm).squaredNorm());
        sol.residual = std::max(sol.residual, r / scale);
        if (sol.residual > 1e-8)
            throw NumericalError(
                "cell problems: coupled solve residual " +
                std::to_string(sol.residual) +
                "; the interface coupling may have destroyed definiteness");
    }
    return sol;
}

CellSolution solve_cell_problems(const MaterialParams& p,
                                 const KineticsParams& k,
                                 const PeriodicMesh& mesh,
                                 const VelocityField& field,
                                 const DriftPair& drifts, double T0,
                                 double C0) {
    if (!(T0 > 0.0))
        throw NumericalError("cell problems: T0 must be > 0");
    if (C0 < 0.0) throw NumericalError("cell problems: C0 must be >= 0");
    CellSolution sol = solve_cell_problems_a(
        p, k.Q, k.A, arrhenius_df(T0, k.T_a) * C0, arrhenius_f(T0, k.T_a),
        mesh, field, drifts);
    sol.T0 = T0;
    sol.C0 = C0;
    return sol;
}

Vec reconstruct_corrector_T1(const CellSolution& sol, const Vec2& gradT0) {
    return gradT0.x() * sol.chi[0] + gradT0.y() * sol.chi[1];
}

Vec reconstruct_corrector_C1(const CellSolution& sol, const Vec2& gradC0) {
    return gradC0.x() * sol.omega[0] + gradC0.y() * sol.omega[1];
}

}  // namespace homogfc
