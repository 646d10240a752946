#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "homogfc/mesh.hpp"

using namespace homogfc;

TEST_CASE("empty cell mesh is exact") {
    const PeriodicMesh m = mesh_cell(make_empty_cell(), 0.25);
    validate_mesh(m);
    CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.interface_edges.empty());
    for (const auto& t : m.triangles) CHECK(t.domain == 0);
}

TEST_CASE("disk mesh gas area approximates the porosity") {
    const CellGeometry g = make_disk_cell(Vec2(0.5, 0.5), 0.25);
    const double theta = porosity(g);

    const PeriodicMesh m = mesh_cell(g, 0.05);
    validate_mesh(m);
    CHECK(std::abs(m.gas_area() - theta) < 0.05 * 0.05);

    // refinement: boundary-snapped vertices give ~second-order area error
    const double e1 = std::abs(mesh_cell(g, 0.1).gas_area() - theta);
    const double e2 = std::abs(mesh_cell(g, 0.05).gas_area() - theta);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("mesh invariants hold across disk radii") {
    for (double r : {0.1, 0.17, 0.25, 0.33, 0.4}) {
        const PeriodicMesh m = mesh_cell(make_disk_cell(Vec2(0.5, 0.5), r), 0.08);
        validate_mesh(m);  // throws MeshError on any violation
        for (const auto& e : m.interface_edges) {
            CHECK(std::abs(e.normal.norm() - 1.0) < 1e-12);
            CHECK(m.triangles[e.gas_tri].domain == 0);
            CHECK(m.triangles[e.solid_tri].domain == 1);
        }
        CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("stripe mesh") {
    const CellGeometry g = make_stripe_cell(1, 0.5);
    const PeriodicMesh m = mesh_cell(g, 0.05);
    validate_mesh(m);
    CHECK(m.gas_area() == doctest::Approx(0.5).epsilon(1e-12));
    // two straight interface lines of length 1 each
    CHECK(m.interface_length_discrete() == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("interface length converges to the perimeter") {
    const CellGeometry g = make_disk_cell(Vec2(0.5, 0.5), 0.25);
    const double exact = 2.0 * M_PI * 0.25;
    const double e1 = std::abs(mesh_cell(g, 0.1).interface_length_discrete() - exact);
    const double e2 =
        std::abs(mesh_cell(g, 0.05).interface_length_discrete() - exact);
    CHECK(e2 < e1);
    CHECK(e2 < 1e-3);
}

TEST_CASE("mesh generation is deterministic") {
    const CellGeometry g = make_disk_cell(Vec2(0.5, 0.5), 0.3);
    const PeriodicMesh a = mesh_cell(g, 0.07);
    const PeriodicMesh b = mesh_cell(g, 0.07);
    REQUIRE(a.num_vertices() == b.num_vertices());
    for (int v = 0; v < a.num_vertices(); ++v)
        CHECK(a.vertices[v] == b.vertices[v]);  // bitwise
}

TEST_CASE("rebuild_topology reproduces the mesher's own topology") {
    PeriodicMesh m = mesh_cell(make_disk_cell(Vec2(0.5, 0.5), 0.25), 0.1);
    const size_t n_iface = m.interface_edges.size();
    const std::vector<int> rep = m.rep;
    rebuild_topology(m);
    CHECK(m.interface_edges.size() == n_iface);
    CHECK(m.rep == rep);
    validate_mesh(m);
}

TEST_CASE("invalid mesh size is rejected") {
    CHECK_THROWS_AS(mesh_cell(make_empty_cell(), 0.0), MeshError);
    CHECK_THROWS_AS(mesh_cell(make_empty_cell(), 0.6), MeshError);
}
