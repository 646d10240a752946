#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "homogfc/tensors.hpp"

using namespace homogfc;

namespace {

struct Setup {
    PeriodicMesh mesh;
    VelocityField field;
    DriftPair drifts;
    AuxiliaryPotentials aux;
};

Setup make_setup(const CellGeometry& g, double h, const MaterialParams& p,
                 double amplitude) {
    Setup s;
    s.mesh = mesh_cell(g, h);
    s.field = amplitude > 0.0 ? make_cellular_velocity(s.mesh, amplitude)
                              : make_zero_velocity(s.mesh);
    s.drifts = effective_drifts(p, s.mesh, s.field);
    s.aux = solve_auxiliary(p, s.mesh, s.field, s.drifts);
    return s;
}

}  // namespace

TEST_CASE("trivial limit: no obstacle, no flow, no reaction") {
    MaterialParams p{1.0, 1.0, 2.0, 2.0, 0.7};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_empty_cell(), 0.1, p, 0.0);
    const EffectiveTensors t = compute_effective_tensors(
        p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
    CHECK((t.lambda - 2.0 * Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((t.D - 0.7 * Mat2::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((t.lambda_alt - t.lambda).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((t.D_alt - t.D).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("centered disk at rest: symmetric isotropic tensors") {
    MaterialParams p{1.0, 2.0, 1.0, 3.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.05, p, 0.0);
    const EffectiveTensors t = compute_effective_tensors(
        p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);

    CHECK(std::abs(t.lambda(0, 1)) <= 1e-10);
    CHECK(std::abs(t.lambda(1, 0)) <= 1e-10);
    CHECK(t.lambda(0, 0) == doctest::Approx(t.lambda(1, 1)).epsilon(1e-8));
    CHECK(std::abs(t.D(0, 1)) <= 1e-10);
    CHECK(t.D(0, 0) == doctest::Approx(t.D(1, 1)).epsilon(1e-8));

    // obstruction only slows diffusion: D below the gas-fraction bound
    const double gas = porosity(make_disk_cell(Vec2(0.5, 0.5), 0.25));
    CHECK(t.D(0, 0) < gas * p.D);
    CHECK(t.D(0, 0) > 0.0);
}

TEST_CASE("layered medium reproduces the harmonic and arithmetic means") {
    MaterialParams p{1.0, 1.0, 1.0, 10.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_stripe_cell(0, 0.5), 0.02, p, 0.0);
    const EffectiveTensors t = compute_effective_tensors(
        p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);

    const double harmonic = 2.0 * (1.0 * 10.0) / (1.0 + 10.0);  // 20/11
    const double arithmetic = 0.5 * (1.0 + 10.0);               // 5.5
    CHECK(std::abs(t.lambda(0, 0) - harmonic) <= 0.01 * harmonic);
    CHECK(std::abs(t.lambda(1, 1) - arithmetic) <= 0.01 * arithmetic);
    CHECK(std::abs(t.lambda(0, 1)) <= 1e-8);
}

TEST_CASE("both evaluation routes agree without surface coupling") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    for (double amp : {0.0, 1.0}) {
        Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.05, p, amp);
        const EffectiveTensors t = compute_effective_tensors(
            p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
        CHECK(t.form_discrepancy <= 1e-8);
    }
}

TEST_CASE("divergence-form tensors are invariant under corrector shifts") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.08, p, 1.0);
    CellSolution sol = solve_cell_problems(p, k, s.mesh, s.field, s.drifts,
                                           1.0, 0.5);
    const TensorPair t0 = tensors_divergence_form(sol, s.aux, p);
    // the additive freedom of the coupled system is the direction (a2, -a1)
    const double c = 0.37;
    for (int j = 0; j < 2; ++j) {
        sol.chi[j].array() += c * sol.a2;
        sol.omega[j].array() -= c * sol.a1;
    }
    const TensorPair t1 = tensors_divergence_form(sol, s.aux, p);
    CHECK((t1.lambda - t0.lambda).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((t1.D - t0.D).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("symmetric combination: two routes of an algebraic identity") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.08, p, 1.0);
    const CellSolution sol = solve_cell_problems(p, k, s.mesh, s.field,
                                                 s.drifts, 1.0, 0.5);
    const TensorPair t = tensors_interface_form(sol, p, k.Q, k.A);
    const SymTensorCheck c = symmetric_part_tensor(t, sol, p, k.Q, k.A);
    const double scale = c.L_sym.cwiseAbs().maxCoeff();
    CHECK(c.difference <= 1e-8 * std::max(1.0, scale));
    CHECK((c.L_sym - Mat2(c.L_sym.transpose())).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("coercivity bounds are tight on the unobstructed cell") {
    MaterialParams p{1.0, 1.0, 2.0, 2.0, 0.7};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_empty_cell(), 0.1, p, 0.0);
    const CellSolution sol = solve_cell_problems(p, k, s.mesh, s.field,
                                                 s.drifts, 1.0, 0.5);
    const TensorPair t = tensors_divergence_form(sol, s.aux, p);
    const CoercivityReport r = coercivity_report(t, p, k.Q, s.mesh);
    CHECK(r.positive_definite);
    CHECK(r.lam_lower_ok);
    CHECK(r.D_lower_ok);
    CHECK(r.D_upper_ok);
    CHECK(r.D_max_eig == doctest::Approx(r.D_upper_bound).epsilon(1e-10));
    CHECK(r.to_json().find("positive_definite") != std::string::npos);
}

TEST_CASE("convection enhances longitudinal dispersion") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 0.1};
    KineticsParams k{0.0, 1.0, 1.0};
    double prev = -1.0;
    for (double amp : {0.0, 1.0, 2.0}) {
        Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.08, p, amp);
        const EffectiveTensors t = compute_effective_tensors(
            p, k, s.mesh, s.field, s.drifts, s.aux, 1.0, 0.5);
        const double d11 = 0.5 * (t.D(0, 0) + t.D(1, 1));
        CHECK(d11 >= prev);
        prev = d11;
    }
}

TEST_CASE("a one-node table reproduces the single evaluation") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, 1.0);
    TableGrid g{1.3, 1.3, 1, 0.4, 0.4, 1};
    const TensorTable tab =
        build_tensor_table(p, k, s.mesh, s.field, s.drifts, s.aux, g);
    const EffectiveTensors direct = compute_effective_tensors(
        p, k, s.mesh, s.field, s.drifts, s.aux, 1.3, 0.4);
    CHECK((tab.at(0, 0).lambda - direct.lambda).cwiseAbs().maxCoeff() <= 1e-13);
    CHECK((tab.at(0, 0).D - direct.D).cwiseAbs().maxCoeff() <= 1e-13);

    // clamped lookup far outside the one-point grid still answers, and counts
    const long before = tab.clamped_lookups;
    const TensorPair far = tab.lookup(10.0, 10.0);
    CHECK(tab.clamped_lookups == before + 1);
    CHECK((far.lambda - direct.lambda).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("without reaction the table is constant in the macro state") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{0.0, 1.0, 1.0};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1, p, 1.0);
    TableGrid g{0.5, 2.0, 3, 0.0, 1.0, 3};
    const TensorTable tab =
        build_tensor_table(p, k, s.mesh, s.field, s.drifts, s.aux, g);
    for (int it = 0; it < 3; ++it)
        for (int ic = 0; ic < 3; ++ic) {
            CHECK((tab.at(it, ic).lambda - tab.at(0, 0).lambda)
                      .cwiseAbs()
                      .maxCoeff() <= 1e-12);
            CHECK((tab.at(it, ic).D - tab.at(0, 0).D).cwiseAbs().maxCoeff() <=
                  1e-12);
        }
    // interpolation of a constant is exact, anywhere in range
    const TensorPair mid = tab.lookup(0.91, 0.37);
    CHECK((mid.lambda - tab.at(0, 0).lambda).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("bilinear interpolation error is small on a 5x5 grid") {
    MaterialParams p{1.0, 2.0, 1.0, 2.0, 1.0};
    KineticsParams k{1.0, 1.0, 0.5};
    Setup s = make_setup(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.12, p, 1.0);
    TableGrid g{0.5, 2.0, 5, 0.0, 1.0, 5};
    const TensorTable tab =
        build_tensor_table(p, k, s.mesh, s.field, s.drifts, s.aux, g);

    // node lookups are exact
    const TensorPair n00 = tab.lookup(tab.T0_nodes[2], tab.C0_nodes[3]);
    CHECK((n00.lambda - tab.at(2, 3).lambda).cwiseAbs().maxCoeff() <= 1e-12);

    // off-node: interpolation vs direct solve at a cell midpoint
    const double Tm = std::sqrt(tab.T0_nodes[1] * tab.T0_nodes[2]);
    const double Cm = 0.5 * (tab.C0_nodes[1] + tab.C0_nodes[2]);
    const TensorPair interp = tab.lookup(Tm, Cm);
    const EffectiveTensors direct = compute_effective_tensors(
        p, k, s.mesh, s.field, s.drifts, s.aux, Tm, Cm);
    const double scale = direct.lambda.cwiseAbs().maxCoeff();
    CHECK((interp.lambda - direct.lambda).cwiseAbs().maxCoeff() <=
          0.02 * scale);
    CHECK((interp.D - direct.D).cwiseAbs().maxCoeff() <=
          0.02 * direct.D.cwiseAbs().maxCoeff());
}
