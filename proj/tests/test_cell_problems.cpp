#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <array>
#include <cmath>

#include "doctest.h"
#include "homogfc/cell_problems.hpp"
#include "homogfc/coefficients.hpp"

using namespace homogfc;

namespace {

struct Setup {
    PeriodicMesh mesh;
    VelocityField field;
    MaterialParams p;
    DriftPair drifts;
};

Setup make_setup(const CellGeometry& g, double h, const MaterialParams& p,
                 bool cellular, double amplitude = 1.0) {
    Setup s{mesh_cell(g, h), {}, p, {}};
    s.field = cellular ? make_cellular_velocity(s.mesh, amplitude)
                       : make_zero_velocity(s.mesh);
    s.drifts = effective_drifts(p, s.mesh, s.field);
    return s;
}

double dirichlet_energy(const FeSpace& space, const Vec& u) {
    const SpMat K = assemble_stiffness(space, 1.0, space.domain < 0 ? 1.0 : 0.0);
    return u.dot(K * u);
}

}  // namespace

TEST_CASE("auxiliary potentials vanish when the velocity is already a drift") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    // constant b on the empty cell: b == b_T == b_C, all right-hand sides zero
    Setup s = make_setup(make_empty_cell(), 0.1, p, false);
    s.field = make_constant_velocity(s.mesh, Vec2(0.4, 0.1));
    s.drifts = effective_drifts(p, s.mesh, s.field);
    const AuxiliaryPotentials aux =
        solve_auxiliary(p, s.mesh, s.field, s.drifts);
    for (int j = 0; j < 2; ++j) {
        CHECK(aux.Pi[j].cwiseAbs().maxCoeff() < 1e-10);
        CHECK(aux.Sigma[j].cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("auxiliary potentials vanish at rest") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, false);
    const AuxiliaryPotentials aux =
        solve_auxiliary(p, s.mesh, s.field, s.drifts);
    for (int j = 0; j < 2; ++j) {
        CHECK(aux.Pi[j].cwiseAbs().maxCoeff() < 1e-10);
        CHECK(aux.Sigma[j].cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("auxiliary potentials are zero-mean and nonzero under flow") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, true);
    const AuxiliaryPotentials aux =
        solve_auxiliary(p, s.mesh, s.field, s.drifts);
    for (int j = 0; j < 2; ++j) {
        CHECK(std::abs(aux.Pi[j].dot(aux.full.weight)) < 1e-10);
        CHECK(std::abs(aux.Sigma[j].dot(aux.gas.weight)) < 1e-10);
        CHECK(aux.Pi[j].cwiseAbs().maxCoeff() > 1e-6);
    }
}

TEST_CASE("correctors vanish in the fully trivial case") {
    MaterialParams p;  // all ones
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_empty_cell(), 0.1, p, false);
    const CellSolution sol =
        solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);
    for (int j = 0; j < 2; ++j) {
        CHECK(sol.chi[j].cwiseAbs().maxCoeff() < 1e-12);
        CHECK(sol.omega[j].cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(sol.residual <= 1e-10);
}

TEST_CASE("decoupled mass corrector matches a single-field oracle") {
    // A = 0, b = 0, equal conductivities: chi = 0 and omega solves the
    // classical perforated-cell problem, assembled here independently
    MaterialParams p{1.0, 1.0, 1.0, 1.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.08, p, false);
    const CellSolution sol =
        solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);

    for (int j = 0; j < 2; ++j)
        CHECK(sol.chi[j].cwiseAbs().maxCoeff() < 1e-10);

    const FeSpace gas = make_space_gas(s.mesh);
    const SpMat K = assemble_stiffness(gas, p.D, 0.0);
    for (int j = 0; j < 2; ++j) {
        // weak form of div(D (e_j + grad w)) = 0 in the gas, no-flux on Gamma
        Vec rhs = Vec::Zero(gas.n);
        double scale = 0.0;
        for (int t = 0; t < static_cast<int>(s.mesh.triangles.size()); ++t) {
            const auto& tri = s.mesh.triangles[t];
            if (tri.domain != 0) continue;
            const TriGeom g = tri_geom(s.mesh, t);
            for (int i = 0; i < 3; ++i) {
                const double c = -g.area * p.D * g.grad[i][j];
                rhs[gas.dof_of(tri.v[i])] += c;
                scale = std::max(scale, std::abs(c));
            }
        }
        const Vec w = solve_zero_mean(K, gas, rhs, scale);
        CHECK((sol.omega[j] - w).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("zero concentration drops the cross coupling") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, true);
    const CellSolution a = solve_cell_problems(p, k, s.mesh, s.field, s.drifts,
                                               1.3, 0.0);
    const CellSolution b = solve_cell_problems_a(
        p, k.Q, k.A, 0.0, arrhenius_f(1.3, k.T_a), s.mesh, s.field, s.drifts);
    CHECK(a.a1 == 0.0);
    for (int j = 0; j < 2; ++j) {
        CHECK((a.chi[j] - b.chi[j]).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((a.omega[j] - b.omega[j]).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("weak residual is the primary contract") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, true);
    const CellSolution sol =
        solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);
    CHECK(sol.residual <= 1e-10);
    CHECK(sol.a2 == doctest::Approx(arrhenius_f(1.0, k.T_a)).epsilon(1e-14));
    CHECK(sol.a1 ==
          doctest::Approx(arrhenius_df(1.0, k.T_a) * 0.5).epsilon(1e-14));
}

TEST_CASE("corrector reconstruction is linear in the macro gradient") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.12, p, true);
    const CellSolution sol =
        solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);

    CHECK(reconstruct_corrector_T1(sol, Vec2(0.0, 0.0)).cwiseAbs().maxCoeff() ==
          0.0);
    CHECK((reconstruct_corrector_T1(sol, Vec2(1.0, 0.0)) - sol.chi[0])
              .cwiseAbs()
              .maxCoeff() == 0.0);
    const Vec t1 = reconstruct_corrector_T1(sol, Vec2(0.3, -0.7));
    const Vec t2 = reconstruct_corrector_T1(sol, Vec2(0.6, -1.4));
    CHECK((t2 - 2.0 * t1).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((reconstruct_corrector_C1(sol, Vec2(0.0, 1.0)) - sol.omega[1])
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("mass corrector responds to the velocity amplitude") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    std::array<Vec, 3> omega;
    int i = 0;
    for (double amp : {0.0, 1.0, 2.0}) {
        Setup s =
            make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, true, amp);
        if (amp == 0.0) s.field = make_zero_velocity(s.mesh);
        s.drifts = effective_drifts(p, s.mesh, s.field);
        const CellSolution sol =
            solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);
        CHECK(sol.residual <= 1e-10);
        omega[i++] = sol.omega[0];
    }
    // distinct flows give distinct correctors
    CHECK((omega[1] - omega[0]).cwiseAbs().maxCoeff() > 1e-4);
    CHECK((omega[2] - omega[1]).cwiseAbs().maxCoeff() > 1e-4);
}

TEST_CASE("corrector energies converge under mesh refinement") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    const CellGeometry g = make_disk_cell(Vec2(0.5, 0.5), 0.25);

    double e[3];
    int i = 0;
    for (double h : {0.16, 0.08, 0.04}) {
        Setup s = make_setup(g, h, p, false);
        const CellSolution sol =
            solve_cell_problems(p, k, s.mesh, s.field, s.drifts, 1.0, 0.5);
        const FeSpace gas = make_space_gas(s.mesh);
        e[i++] = dirichlet_energy(gas, sol.omega[0]);
    }
    // Richardson: successive differences shrink with rate >= 1.5
    const double rate = std::log2(std::abs(e[0] - e[1]) / std::abs(e[1] - e[2]));
    CHECK(rate >= 1.5);
}
