#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "homogfc/geometry.hpp"

namespace homogfc {

/// Interface-conforming periodic triangulation of the unit cell.
/// Every triangle lies in exactly one subdomain; interface vertices sit
/// exactly on the analytic interface; boundary vertices on opposite faces
/// match coordinates exactly and are identified through `rep`.
struct PeriodicMesh {
    struct Triangle {
        std::array<int, 3> v;  // CCW
        int domain;            // 0 = gas, 1 = solid
    };

    struct InterfaceEdge {
        int a, b;       // endpoint vertex ids (on Gamma)
        int gas_tri;    // adjacent gas triangle
        int solid_tri;  // adjacent solid triangle
        Vec2 normal;    // unit, pointing from gas into solid
        double length;
    };

    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<InterfaceEdge> interface_edges;

    // Periodic identification: rep[v] is the canonical vertex id of v's
    // periodic equivalence class (rep[v] == v for interior and master
    // boundary vertices).
    std::vector<int> rep;

    // slave -> master pairs, for inspection/export
    std::vector<std::pair<int, int>> periodic_pairs;

    double h = 0.0;
    CellGeometry geometry;

    int num_vertices() const { return static_cast<int>(vertices.size()); }

    double triangle_area(int t) const;
    Vec2 centroid(int t) const;

    double total_area() const;
    double gas_area() const;
    double interface_length_discrete() const;
};

/// Deterministic mesh of the cell at target size h in (0, 0.5).
PeriodicMesh mesh_cell(const CellGeometry& geom, double h);

/// Recomputes interface edges and the periodic identification from the
/// vertex and triangle lists alone (the mesh must cover [0,1)^2 with exact
/// coordinate matches on opposite faces). Used after tiling.
void rebuild_topology(PeriodicMesh& mesh);

/// Checks every PeriodicMesh invariant; throws MeshError on violation.
void validate_mesh(const PeriodicMesh& mesh);

}  // namespace homogfc
