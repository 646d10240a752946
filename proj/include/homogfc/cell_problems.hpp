#pragma once

#include <array>

#include "homogfc/coefficients.hpp"
#include "homogfc/fem.hpp"
#include "homogfc/kinetics.hpp"
#include "homogfc/velocity.hpp"

namespace homogfc {

/// Zero-mean periodic potentials taming the singular convection:
///   -lap Pi_i    = c(y) (b_T,i - b_i)   on Y  (flux continuous across Gamma)
///   -lap Sigma_i = b_C,i - b_i          on Y_g (zero normal flux on Gamma)
struct AuxiliaryPotentials {
    FeSpace full;  // H1_#(Y)
    FeSpace gas;   // H1_#(Y_g)
    std::array<Vec, 2> Pi;
    std::array<Vec, 2> Sigma;
};

AuxiliaryPotentials solve_auxiliary(const MaterialParams& p,
                                    const PeriodicMesh& mesh,
                                    const VelocityField& field,
                                    const DriftPair& drifts);

/// Correctors (chi_j on Y, omega_j on Y_g) of the coupled cell problem. The
/// macroscopic state enters only through the interface coefficients
///   a1 = f'(T0) C0,   a2 = f(T0),
/// which multiply the surface-coupling bilinear form QA [a1 chi + a2 omega].
struct CellSolution {
    FeSpace full;
    FeSpace gas;
    std::array<Vec, 2> chi;
    std::array<Vec, 2> omega;
    double T0 = 0.0, C0 = 0.0;
    double a1 = 0.0, a2 = 0.0;
    double residual = 0.0;  // relative weak residual of the coupled system
};

/// Solver parameterized directly by (a1, a2); chi is normalized to zero mean
/// over Y. For A > 0 the additive-constant freedom is one-dimensional along
/// (a2, -a1), so the mean of omega is then determined, not free; for A = 0
/// the blocks decouple and both fields are zero-mean.
CellSolution solve_cell_problems_a(const MaterialParams& p, double Q, double A,
                                   double a1, double a2,
                                   const PeriodicMesh& mesh,
                                   const VelocityField& field,
                                   const DriftPair& drifts);

CellSolution solve_cell_problems(const MaterialParams& p,
                                 const KineticsParams& k,
                                 const PeriodicMesh& mesh,
                                 const VelocityField& field,
                                 const DriftPair& drifts, double T0, double C0);

/// First-order two-scale terms T1 = chi . grad T0, C1 = omega . grad C0.
Vec reconstruct_corrector_T1(const CellSolution& sol, const Vec2& gradT0);
Vec reconstruct_corrector_C1(const CellSolution& sol, const Vec2& gradC0);

}  // namespace homogfc
