#include "homogfc/velocity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homogfc/errors.hpp"

namespace homogfc {

namespace {

// Stream value that makes mean + curl(psi) vanish identically:
// curl(a*y1 + b*y2) = (b, -a).
double psi_affine(const Vec2& mean, const Vec2& p) {
    return mean.y() * p.x() - mean.x() * p.y();
}

// Distance from p to the solid inclusion, <= 0 inside or on the interface.
double solid_gap(const CellGeometry& geom, const Vec2& p) {
    switch (geom.kind) {
        case CellGeometry::Kind::none:
            return 1.0;
        case CellGeometry::Kind::disk:
            return (p - geom.center).norm() - geom.radius;
        case CellGeometry::Kind::stripe: {
            const double lo = geom.stripe_lo(), hi = geom.stripe_hi();
            const double x = p[geom.axis];
            return x < lo ? lo - x : (x > hi ? x - hi : -std::min(x - lo, hi - x));
        }
    }
    return 1.0;
}

double smoothstep01(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * (3.0 - 2.0 * x);
}

void check_stripe_compatible(const CellGeometry& geom, const Vec2& mean,
                             double scale) {
    if (geom.kind != CellGeometry::Kind::stripe) return;
    if (std::abs(mean[geom.axis]) > 1e-12 * std::max(scale, 1.0))
        throw GeometryError(
            "a solid stripe blocks any mean flow across it; the velocity mean "
            "must have zero component along axis " + std::to_string(geom.axis));
}

/// Least-squares stream fit: minimizes sum_K |K| |mean + curl psi - b_K|^2
/// over periodic P1 psi with psi = psi_affine on interface (and solid)
/// vertices. The normal-equation matrix is the gas stiffness because the
/// 90-degree rotation inside curl preserves inner products.
VelocityField fit_stream(const PeriodicMesh& mesh, const Vec2& mean,
                         const std::vector<Vec2>& b_tri) {
    const FeSpace gas = make_space_gas(mesh);

    std::vector<int> dof_vertex(gas.n, -1);
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (mesh.rep[v] == v && gas.dof[v] >= 0) dof_vertex[gas.dof[v]] = v;

    // gas dofs pinned to the affine stream: the interface vertices
    std::vector<char> pinned(gas.n, 0);
    for (const auto& tri : mesh.triangles) {
        if (tri.domain != 1) continue;
        for (int v : tri.v) {
            const int d = gas.dof_of(v);
            if (d >= 0) pinned[d] = 1;
        }
    }

    const SpMat K = assemble_stiffness(gas, 1.0, 0.0);

    Vec rhs = Vec::Zero(gas.n);
    double asm_scale = 0.0;  // size of the contributions, for the
                             // compatibility check on analytically-zero loads
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri.domain != 0) continue;
        const TriGeom g = tri_geom(mesh, t);
        const Vec2 d = b_tri[t] - mean;
        for (int i = 0; i < 3; ++i) {
            // curl(phi_i) . d
            const double c =
                g.grad[i].y() * d.x() - g.grad[i].x() * d.y();
            rhs[gas.dof_of(tri.v[i])] += g.area * c;
            asm_scale = std::max(asm_scale, std::abs(g.area * c));
        }
    }

    Vec psi(gas.n);
    const int n_pinned =
        static_cast<int>(std::count(pinned.begin(), pinned.end(), char(1)));
    if (n_pinned == 0) {
        // empty cell: fix the additive gauge by zero mean
        psi = solve_zero_mean(K, gas, rhs, asm_scale);
    } else {
        std::vector<int> free_id(gas.n, -1);
        int nf = 0;
        for (int i = 0; i < gas.n; ++i)
            if (!pinned[i]) free_id[i] = nf++;

        Vec psi_pin = Vec::Zero(gas.n);
        for (int i = 0; i < gas.n; ++i)
            if (pinned[i])
                psi_pin[i] = psi_affine(mean, mesh.vertices[dof_vertex[i]]);

        std::vector<Eigen::Triplet<double>> trips;
        Vec rhs_f = Vec::Zero(nf);
        for (int i = 0; i < gas.n; ++i)
            if (!pinned[i]) rhs_f[free_id[i]] = rhs[i];
        for (int k = 0; k < K.outerSize(); ++k) {
            for (SpMat::InnerIterator it(K, k); it; ++it) {
                const int r = static_cast<int>(it.row());
                const int c = static_cast<int>(it.col());
                if (pinned[r]) continue;
                if (pinned[c])
                    rhs_f[free_id[r]] -= it.value() * psi_pin[c];
                else
                    trips.emplace_back(free_id[r], free_id[c], it.value());
            }
        }
        SpMat Kff(nf, nf);
        Kff.setFromTriplets(trips.begin(), trips.end());
        const Vec psi_f = lu_solve(Kff, rhs_f);

        for (int i = 0; i < gas.n; ++i)
            psi[i] = pinned[i] ? psi_pin[i] : psi_f[free_id[i]];
    }

    VelocityField vf;
    vf.mesh = &mesh;
    vf.mean = mean;
    vf.stream = Vec::Zero(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const int rv = mesh.rep[v];
        const int d = gas.dof[rv];
        vf.stream[v] =
            d >= 0 ? psi[d] : psi_affine(mean, mesh.vertices[rv]);
    }
    return vf;
}

}  // namespace

Vec2 VelocityField::value(int tri) const {
    const auto& t = mesh->triangles[tri];
    if (t.domain != 0) return Vec2::Zero();
    const TriGeom g = tri_geom(*mesh, tri);
    Vec2 grad = Vec2::Zero();
    for (int i = 0; i < 3; ++i) grad += stream[t.v[i]] * g.grad[i];
    return mean + Vec2(grad.y(), -grad.x());
}

double VelocityField::max_norm() const {
    double m = 0.0;
    for (int t = 0; t < static_cast<int>(mesh->triangles.size()); ++t)
        if (mesh->triangles[t].domain == 0)
            m = std::max(m, value(t).norm());
    return m;
}

VelocityField make_zero_velocity(const PeriodicMesh& mesh) {
    VelocityField vf;
    vf.mesh = &mesh;
    vf.mean = Vec2::Zero();
    vf.stream = Vec::Zero(mesh.num_vertices());
    return vf;
}

VelocityField make_constant_velocity(const PeriodicMesh& mesh,
                                     const Vec2& mean) {
    check_stripe_compatible(mesh.geometry, mean, mean.norm());
    std::vector<Vec2> b_tri(mesh.triangles.size(), mean);
    VelocityField vf = fit_stream(mesh, mean, b_tri);
    validate_velocity(vf);
    return vf;
}

VelocityField make_cellular_velocity(const PeriodicMesh& mesh,
                                     double amplitude) {
    constexpr double taper_width = 0.15;
    const double pi2 = 2.0 * std::numbers::pi;
    VelocityField vf;
    vf.mesh = &mesh;
    vf.mean = Vec2::Zero();
    vf.stream = Vec::Zero(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) {
        const Vec2& p = mesh.vertices[mesh.rep[v]];
        const double gap = solid_gap(mesh.geometry, p);
        if (gap < 1e-12) continue;  // exact zero on Gamma and inside
        const double taper = smoothstep01(gap / taper_width);
        vf.stream[v] = amplitude / pi2 * std::sin(pi2 * p.x()) *
                       std::sin(pi2 * p.y()) * taper;
    }
    validate_velocity(vf);
    return vf;
}

VelocityField project_divergence_free(const PeriodicMesh& mesh,
                                      const std::vector<Vec2>& raw_nodal) {
    if (static_cast<int>(raw_nodal.size()) != mesh.num_vertices())
        throw NumericalError("velocity projection: nodal sample size mismatch");
    double scale = 0.0;
    for (const auto& b : raw_nodal) {
        if (!b.allFinite())
            throw NumericalError("velocity projection: non-finite sample");
        scale = std::max(scale, b.norm());
    }
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if ((raw_nodal[v] - raw_nodal[mesh.rep[v]]).norm() >
            1e-12 * std::max(scale, 1.0))
            throw NumericalError(
                "velocity projection: nodal sample is not periodic");

    std::vector<Vec2> b_tri(mesh.triangles.size(), Vec2::Zero());
    Vec2 mean = Vec2::Zero();
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri.domain != 0) continue;
        Vec2 avg = (raw_nodal[tri.v[0]] + raw_nodal[tri.v[1]] +
                    raw_nodal[tri.v[2]]) /
                   3.0;
        b_tri[t] = avg;
        mean += mesh.triangle_area(t) * avg;
    }
    check_stripe_compatible(mesh.geometry, mean, scale);
    if (mesh.geometry.kind == CellGeometry::Kind::stripe)
        mean[mesh.geometry.axis] = 0.0;

    VelocityField vf = fit_stream(mesh, mean, b_tri);
    validate_velocity(vf);
    return vf;
}

VelocityField project_divergence_free(const VelocityField& field) {
    const PeriodicMesh& mesh = *field.mesh;
    std::vector<Vec2> b_tri(mesh.triangles.size(), Vec2::Zero());
    Vec2 mean = Vec2::Zero();
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        if (mesh.triangles[t].domain != 0) continue;
        b_tri[t] = field.value(t);
        mean += mesh.triangle_area(t) * b_tri[t];
    }
    VelocityField vf = fit_stream(mesh, mean, b_tri);
    validate_velocity(vf);
    return vf;
}

double weak_divergence_residual(const VelocityField& field) {
    const PeriodicMesh& mesh = *field.mesh;
    const FeSpace gas = make_space_gas(mesh);
    Vec r = Vec::Zero(gas.n);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri.domain != 0) continue;
        const TriGeom g = tri_geom(mesh, t);
        const Vec2 b = field.value(t);
        for (int i = 0; i < 3; ++i)
            r[gas.dof_of(tri.v[i])] += g.area * b.dot(g.grad[i]);
    }
    return gas.n > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
}

double max_interface_normal_flux(const VelocityField& field) {
    const PeriodicMesh& mesh = *field.mesh;
    double m = 0.0;
    for (const auto& e : mesh.interface_edges)
        m = std::max(m, std::abs(field.value(e.gas_tri).dot(e.normal)));
    return m;
}

void validate_velocity(const VelocityField& field) {
    const PeriodicMesh& mesh = *field.mesh;
    if (field.stream.size() != mesh.num_vertices())
        throw InvariantError("velocity: stream size mismatch");
    if (!field.stream.allFinite() || !field.mean.allFinite())
        throw InvariantError("velocity: non-finite data");
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (field.stream[v] != field.stream[mesh.rep[v]])
            throw InvariantError("velocity: stream not periodically consistent");

    const double scale = std::max(field.max_norm(), 1.0);
    // solid triangles must carry exactly the affine stream, so that the
    // extension of b by zero is globally divergence-free
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri.domain != 1) continue;
        const TriGeom g = tri_geom(mesh, t);
        Vec2 grad = Vec2::Zero();
        for (int i = 0; i < 3; ++i) grad += field.stream[tri.v[i]] * g.grad[i];
        const Vec2 b_solid = field.mean + Vec2(grad.y(), -grad.x());
        if (b_solid.norm() > 1e-10 * scale)
            throw InvariantError("velocity: nonzero flow inside the solid");
    }

    const double div = weak_divergence_residual(field);
    if (div > 1e-10 * scale)
        throw InvariantError("velocity: weak divergence residual " +
                             std::to_string(div));
    const double flux = max_interface_normal_flux(field);
    if (flux > 1e-10 * scale)
        throw InvariantError("velocity: interface normal flux " +
                             std::to_string(flux));
}

}  // namespace homogfc
