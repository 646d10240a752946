#include "homogfc/fem.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <fstream>

#include "homogfc/errors.hpp"
#include "homogfc/velocity.hpp"

namespace homogfc {

namespace {

FeSpace make_space(const PeriodicMesh& mesh, int domain) {
    FeSpace s;
    s.mesh = &mesh;
    s.domain = domain;
    s.dof.assign(mesh.num_vertices(), -1);

    // A representative vertex belongs to the space if any triangle of the
    // covered subdomain(s) touches any member of its periodic class.
    std::vector<char> in(mesh.num_vertices(), 0);
    for (const auto& tri : mesh.triangles) {
        if (domain >= 0 && tri.domain != domain) continue;
        for (int v : tri.v) in[mesh.rep[v]] = 1;
    }
    int n = 0;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        if (in[v]) s.dof[v] = n++;
    s.n = n;

    s.weight = Vec::Zero(n);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (domain >= 0 && tri.domain != domain) continue;
        const double third = mesh.triangle_area(t) / 3.0;
        for (int v : tri.v) s.weight[s.dof[mesh.rep[v]]] += third;
    }
    return s;
}

}  // namespace

FeSpace make_space_full(const PeriodicMesh& mesh) { return make_space(mesh, -1); }
FeSpace make_space_gas(const PeriodicMesh& mesh) { return make_space(mesh, 0); }

TriGeom tri_geom(const PeriodicMesh& mesh, int t) {
    const auto& tri = mesh.triangles[t];
    const Vec2& p0 = mesh.vertices[tri.v[0]];
    const Vec2& p1 = mesh.vertices[tri.v[1]];
    const Vec2& p2 = mesh.vertices[tri.v[2]];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
    TriGeom g;
    g.area = 0.5 * det;
    // grad of barycentric coordinate i is the inward normal of the opposite
    // edge scaled by 1/(2 area)
    g.grad[0] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    g.grad[1] = Vec2(p2.y() - p0.y(), p0.x() - p2.x()) / det;
    g.grad[2] = Vec2(p0.y() - p1.y(), p1.x() - p0.x()) / det;
    return g;
}

SpMat assemble_stiffness(const FeSpace& space, double coeff_gas,
                         double coeff_solid) {
    const PeriodicMesh& mesh = *space.mesh;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!space.covers(tri.domain)) continue;
        const double c = tri.domain == 0 ? coeff_gas : coeff_solid;
        if (c == 0.0) continue;
        const TriGeom g = tri_geom(mesh, t);
        int d[3];
        for (int i = 0; i < 3; ++i) d[i] = space.dof_of(tri.v[i]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(d[i], d[j],
                                   c * g.area * g.grad[i].dot(g.grad[j]));
    }
    SpMat A(space.n, space.n);
    A.setFromTriplets(trips.begin(), trips.end());
    return A;
}

SpMat assemble_mass(const FeSpace& space, double coeff_gas, double coeff_solid) {
    const PeriodicMesh& mesh = *space.mesh;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!space.covers(tri.domain)) continue;
        const double c = tri.domain == 0 ? coeff_gas : coeff_solid;
        if (c == 0.0) continue;
        const double a = mesh.triangle_area(t);
        int d[3];
        for (int i = 0; i < 3; ++i) d[i] = space.dof_of(tri.v[i]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(d[i], d[j],
                                   c * a * (i == j ? 1.0 / 6.0 : 1.0 / 12.0));
    }
    SpMat M(space.n, space.n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

SpMat assemble_convection(const FeSpace& space, const VelocityField& field,
                          double coeff) {
    const PeriodicMesh& mesh = *space.mesh;
    if (field.mesh != &mesh)
        throw NumericalError("convection assembly: field lives on another mesh");
    {
        const double scale = std::max(field.max_norm(), 1.0);
        if (weak_divergence_residual(field) > 1e-10 * scale)
            throw NumericalError(
                "convection assembly: velocity is not weakly divergence-free; "
                "apply project_divergence_free first");
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(9 * mesh.triangles.size());
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (tri.domain != 0 || !space.covers(0)) continue;
        const Vec2 b = field.value(t);
        const TriGeom g = tri_geom(mesh, t);
        const double third = g.area / 3.0;
        int d[3];
        for (int i = 0; i < 3; ++i) d[i] = space.dof_of(tri.v[i]);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j)
                trips.emplace_back(d[i], d[j],
                                   coeff * third * b.dot(g.grad[j]));
        }
    }
    SpMat B(space.n, space.n);
    B.setFromTriplets(trips.begin(), trips.end());
    return B;
}

SpMat assemble_interface_mass(const FeSpace& row_space,
                              const FeSpace& col_space) {
    const PeriodicMesh& mesh = *row_space.mesh;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * mesh.interface_edges.size());
    for (const auto& e : mesh.interface_edges) {
        const int r[2] = {row_space.dof_of(e.a), row_space.dof_of(e.b)};
        const int c[2] = {col_space.dof_of(e.a), col_space.dof_of(e.b)};
        const double L = e.length;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                trips.emplace_back(r[i], c[j],
                                   L * (i == j ? 1.0 / 3.0 : 1.0 / 6.0));
    }
    SpMat M(row_space.n, col_space.n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

SpMat assemble_interface_mass_weighted(const FeSpace& row_space,
                                       const FeSpace& col_space,
                                       const Vec& g_row) {
    const PeriodicMesh& mesh = *row_space.mesh;
    // 2-point Gauss on [0,1]; exact for the cubic g*phi_i*phi_j
    const double q0 = 0.5 * (1.0 - 1.0 / std::sqrt(3.0));
    const double q1 = 0.5 * (1.0 + 1.0 / std::sqrt(3.0));
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * mesh.interface_edges.size());
    for (const auto& e : mesh.interface_edges) {
        const int r[2] = {row_space.dof_of(e.a), row_space.dof_of(e.b)};
        const int c[2] = {col_space.dof_of(e.a), col_space.dof_of(e.b)};
        const double ga = g_row[r[0]], gb = g_row[r[1]];
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                double val = 0.0;
                for (double q : {q0, q1}) {
                    const double phi[2] = {1.0 - q, q};
                    val += 0.5 * (ga * (1.0 - q) + gb * q) * phi[i] * phi[j];
                }
                trips.emplace_back(r[i], c[j], e.length * val);
            }
        }
    }
    SpMat M(row_space.n, col_space.n);
    M.setFromTriplets(trips.begin(), trips.end());
    return M;
}

Vec assemble_load_p0(const FeSpace& space, const std::vector<double>& f_tri) {
    const PeriodicMesh& mesh = *space.mesh;
    Vec rhs = Vec::Zero(space.n);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!space.covers(tri.domain)) continue;
        const double third = mesh.triangle_area(t) / 3.0;
        for (int v : tri.v) rhs[space.dof_of(v)] += third * f_tri[t];
    }
    return rhs;
}

Vec solve_zero_mean(const SpMat& A, const FeSpace& space, const Vec& rhs,
                    double scale) {
    const int n = space.n;
    const double rhs_norm = std::max(rhs.norm(), scale);
    const double sum = rhs.sum();
    if (std::abs(sum) > 1e-10 * std::max(rhs_norm, 1e-30))
        throw NumericalError(
            "zero-mean solve: right-hand side incompatible with the periodic "
            "kernel, 1^T rhs = " + std::to_string(sum));

    // Augmented saddle system [A w; w^T 0]; the multiplier vanishes for a
    // compatible rhs, so the residual of the original equation is untouched.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(A.nonZeros() + 2 * n);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            trips.emplace_back(it.row(), it.col(), it.value());
    for (int i = 0; i < n; ++i) {
        trips.emplace_back(i, n, space.weight[i]);
        trips.emplace_back(n, i, space.weight[i]);
    }
    SpMat aug(n + 1, n + 1);
    aug.setFromTriplets(trips.begin(), trips.end());

    Vec full(n + 1);
    full.head(n) = rhs;
    full[n] = 0.0;
    Vec sol = lu_solve(aug, full);

    Vec x = sol.head(n);
    const double res = (A * x - rhs).norm();
    if (res > 1e-9 * std::max(rhs_norm, 1.0))
        throw NumericalError("zero-mean solve: residual " + std::to_string(res));
    return x;
}

Vec lu_solve(const SpMat& A, const Vec& rhs) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success)
        throw NumericalError("sparse LU factorization failed");
    Vec x = lu.solve(rhs);
    if (lu.info() != Eigen::Success)
        throw NumericalError("sparse LU back-substitution failed");
    return x;
}

void write_operator(const std::string& path, const SpMat& A) {
    std::ofstream os(path);
    if (!os) throw NumericalError("cannot open operator dump file " + path);
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
    os.precision(17);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            os << it.row() + 1 << " " << it.col() + 1 << " " << it.value()
               << "\n";
}

double eval_p1(const FeSpace& space, const Vec& u, int tri, const Vec2& p) {
    const PeriodicMesh& mesh = *space.mesh;
    const auto& tv = mesh.triangles[tri].v;
    const Vec2& p0 = mesh.vertices[tv[0]];
    const Vec2& p1 = mesh.vertices[tv[1]];
    const Vec2& p2 = mesh.vertices[tv[2]];
    const double det = (p1.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p1.y() - p0.y());
    const double l1 = ((p.x() - p0.x()) * (p2.y() - p0.y()) -
                       (p2.x() - p0.x()) * (p.y() - p0.y())) /
                      det;
    const double l2 = ((p1.x() - p0.x()) * (p.y() - p0.y()) -
                       (p.x() - p0.x()) * (p1.y() - p0.y())) /
                      det;
    const double l0 = 1.0 - l1 - l2;
    return l0 * u[space.dof_of(tv[0])] + l1 * u[space.dof_of(tv[1])] +
           l2 * u[space.dof_of(tv[2])];
}

Vec2 grad_p1(const FeSpace& space, const Vec& u, int tri) {
    const TriGeom g = tri_geom(*space.mesh, tri);
    const auto& tv = space.mesh->triangles[tri].v;
    Vec2 grad = Vec2::Zero();
    for (int i = 0; i < 3; ++i) grad += u[space.dof_of(tv[i])] * g.grad[i];
    return grad;
}

}  // namespace homogfc
