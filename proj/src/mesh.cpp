#include "homogfc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace homogfc {

namespace {

double tri_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) -
                  (b.y() - a.y()) * (c.x() - a.x()));
}

// exact-coordinate vertex lookup (coordinates are constructed identically on
// matching faces, so keys agree bitwise; rounding only guards against -0.0)
struct VertexKey {
    long long x, y;
    bool operator<(const VertexKey& o) const {
        return x < o.x || (x == o.x && y < o.y);
    }
};

VertexKey key_of(const Vec2& p) {
    const double scale = 1llu << 48;
    return {static_cast<long long>(std::llround(p.x() * scale)),
            static_cast<long long>(std::llround(p.y() * scale))};
}

class MeshBuilder {
  public:
    int add_vertex(const Vec2& p) {
        auto k = key_of(p);
        auto it = index_.find(k);
        if (it != index_.end()) return it->second;
        int id = static_cast<int>(mesh_.vertices.size());
        mesh_.vertices.push_back(p);
        index_.emplace(k, id);
        return id;
    }

    int find_vertex(const Vec2& p) const {
        auto it = index_.find(key_of(p));
        return it == index_.end() ? -1 : it->second;
    }

    void add_triangle(int a, int b, int c, int domain) {
        if (tri_area(mesh_.vertices[a], mesh_.vertices[b], mesh_.vertices[c]) <
            0.0)
            std::swap(b, c);
        double area =
            tri_area(mesh_.vertices[a], mesh_.vertices[b], mesh_.vertices[c]);
        if (!(area > 1e-16)) {
            std::ostringstream os;
            os << "degenerate triangle near (" << mesh_.vertices[a].x() << ","
               << mesh_.vertices[a].y() << ")";
            throw MeshError(os.str());
        }
        mesh_.triangles.push_back({{a, b, c}, domain});
    }

    PeriodicMesh& mesh() { return mesh_; }

  private:
    PeriodicMesh mesh_;
    std::map<VertexKey, int> index_;
};

// Locate interface edges as edges shared by one gas and one solid triangle,
// and orient the stored normal from gas into solid.
void build_interface_edges(PeriodicMesh& mesh) {
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        for (int e = 0; e < 3; ++e) {
            int a = tri.v[e], b = tri.v[(e + 1) % 3];
            edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
        }
    }
    for (const auto& [edge, tris] : edge_tris) {
        if (tris.size() != 2) continue;
        int d0 = mesh.triangles[tris[0]].domain;
        int d1 = mesh.triangles[tris[1]].domain;
        if (d0 == d1) continue;
        PeriodicMesh::InterfaceEdge ie;
        ie.a = edge.first;
        ie.b = edge.second;
        ie.gas_tri = (d0 == 0) ? tris[0] : tris[1];
        ie.solid_tri = (d0 == 1) ? tris[0] : tris[1];
        const Vec2& pa = mesh.vertices[ie.a];
        const Vec2& pb = mesh.vertices[ie.b];
        Vec2 tangent = pb - pa;
        ie.length = tangent.norm();
        Vec2 n(tangent.y(), -tangent.x());
        n /= n.norm();
        // point toward the solid triangle
        const auto& st = mesh.triangles[ie.solid_tri];
        Vec2 sc = (mesh.vertices[st.v[0]] + mesh.vertices[st.v[1]] +
                   mesh.vertices[st.v[2]]) /
                  3.0;
        Vec2 mid = 0.5 * (pa + pb);
        if (n.dot(sc - mid) < 0.0) n = -n;
        ie.normal = n;
        mesh.interface_edges.push_back(ie);
    }
}

void build_periodic_pairs(MeshBuilder& builder) {
    PeriodicMesh& mesh = builder.mesh();
    const int nv = mesh.num_vertices();
    mesh.rep.assign(nv, 0);
    const double tol = 1e-12;
    for (int v = 0; v < nv; ++v) {
        Vec2 p = mesh.vertices[v];
        Vec2 target = p;
        if (std::abs(p.x() - 1.0) < tol) target.x() = 0.0;
        if (std::abs(p.y() - 1.0) < tol) target.y() = 0.0;
        if (target.x() == p.x() && target.y() == p.y()) {
            mesh.rep[v] = v;
            continue;
        }
        int m = builder.find_vertex(target);
        if (m < 0)
            throw MeshError("periodic partner missing for boundary vertex");
        mesh.rep[v] = m;
        mesh.periodic_pairs.emplace_back(v, m);
    }
}

void triangulate_grid(MeshBuilder& b, const std::vector<double>& xs,
                      const std::vector<double>& ys, const CellGeometry& geom) {
    const int nx = static_cast<int>(xs.size()) - 1;
    const int ny = static_cast<int>(ys.size()) - 1;
    std::vector<std::vector<int>> vid(nx + 1, std::vector<int>(ny + 1));
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j)
            vid[i][j] = b.add_vertex(Vec2(xs[i], ys[j]));
    auto domain_of = [&](const Vec2& c) { return geom.in_solid(c) ? 1 : 0; };
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            int v00 = vid[i][j], v10 = vid[i + 1][j];
            int v01 = vid[i][j + 1], v11 = vid[i + 1][j + 1];
            Vec2 p00(xs[i], ys[j]), p10(xs[i + 1], ys[j]);
            Vec2 p01(xs[i], ys[j + 1]), p11(xs[i + 1], ys[j + 1]);
            if ((i + j) % 2 == 0) {
                b.add_triangle(v00, v10, v11, domain_of((p00 + p10 + p11) / 3));
                b.add_triangle(v00, v11, v01, domain_of((p00 + p11 + p01) / 3));
            } else {
                b.add_triangle(v00, v10, v01, domain_of((p00 + p10 + p01) / 3));
                b.add_triangle(v10, v11, v01, domain_of((p10 + p11 + p01) / 3));
            }
        }
    }
}

std::vector<double> stripe_coords(int n, double lo, double hi) {
    std::vector<double> cs;
    const double snap = 0.35 / n;
    for (int i = 0; i <= n; ++i) {
        double c = static_cast<double>(i) / n;
        if (std::abs(c - lo) < snap || std::abs(c - hi) < snap) continue;
        cs.push_back(c);
    }
    cs.push_back(lo);
    cs.push_back(hi);
    std::sort(cs.begin(), cs.end());
    return cs;
}

void build_tensor_mesh(MeshBuilder& b, const CellGeometry& geom, double h) {
    const int n = std::max(4, static_cast<int>(std::lround(1.0 / h)));
    std::vector<double> uniform(n + 1);
    for (int i = 0; i <= n; ++i) uniform[i] = static_cast<double>(i) / n;
    std::vector<double> xs = uniform, ys = uniform;
    if (geom.kind == CellGeometry::Kind::stripe) {
        auto snapped = stripe_coords(n, geom.stripe_lo(), geom.stripe_hi());
        if (geom.axis == 0)
            xs = snapped;
        else
            ys = snapped;
    }
    triangulate_grid(b, xs, ys, geom);
}

// Disk cell: blended rings between the circle (vertices snapped exactly onto
// it) and the square boundary outside, concentric rings plus a center fan
// inside. Deterministic for a given (geom, h).
void build_disk_mesh(MeshBuilder& b, const CellGeometry& geom, double h) {
    const int n = std::max(4, static_cast<int>(std::lround(1.0 / h)));
    const int m = 4 * n;  // points around
    const Vec2 c = geom.center;
    const double r = geom.radius;

    // square boundary points, counterclockwise from (0,0)
    std::vector<Vec2> square(m);
    for (int k = 0; k < n; ++k) {
        // opposite faces use bitwise-identical coordinates (k/n, never 1-k/n)
        // so the periodic identification matches exactly
        double s = static_cast<double>(k) / n;
        double s_rev = static_cast<double>(n - k) / n;
        square[k] = Vec2(s, 0.0);
        square[n + k] = Vec2(1.0, s);
        square[2 * n + k] = Vec2(s_rev, 1.0);
        square[3 * n + k] = Vec2(0.0, s_rev);
    }
    // circle points in the matching directions
    std::vector<Vec2> circle(m);
    for (int k = 0; k < m; ++k) {
        Vec2 d = square[k] - c;
        circle[k] = c + r * d / d.norm();
    }

    double max_gap = 0.0;
    for (int k = 0; k < m; ++k)
        max_gap = std::max(max_gap, (square[k] - circle[k]).norm());
    const int rings_out = std::max(2, static_cast<int>(std::lround(max_gap / h)));
    const int rings_in = std::max(1, static_cast<int>(std::lround(r / h)));

    // gas: blended rings circle -> square
    std::vector<std::vector<int>> ring(rings_out + 1, std::vector<int>(m));
    for (int l = 0; l <= rings_out; ++l) {
        double s = static_cast<double>(l) / rings_out;
        for (int k = 0; k < m; ++k) {
            Vec2 p = (l == 0) ? circle[k]
                   : (l == rings_out ? square[k]
                                     : Vec2((1.0 - s) * circle[k] + s * square[k]));
            ring[l][k] = b.add_vertex(p);
        }
    }
    for (int l = 0; l < rings_out; ++l) {
        for (int k = 0; k < m; ++k) {
            int k1 = (k + 1) % m;
            int v00 = ring[l][k], v10 = ring[l][k1];
            int v01 = ring[l + 1][k], v11 = ring[l + 1][k1];
            if ((k + l) % 2 == 0) {
                b.add_triangle(v00, v10, v11, 0);
                b.add_triangle(v00, v11, v01, 0);
            } else {
                b.add_triangle(v00, v10, v01, 0);
                b.add_triangle(v10, v11, v01, 0);
            }
        }
    }

    // solid: concentric rings down to a center fan
    std::vector<std::vector<int>> inner(rings_in, std::vector<int>(m));
    inner[0] = ring[0];
    for (int l = 1; l < rings_in; ++l) {
        double rho = r * static_cast<double>(rings_in - l) / rings_in;
        for (int k = 0; k < m; ++k) {
            Vec2 d = circle[k] - c;
            inner[l][k] = b.add_vertex(c + rho * d / r);
        }
    }
    for (int l = 0; l + 1 < rings_in; ++l) {
        for (int k = 0; k < m; ++k) {
            int k1 = (k + 1) % m;
            int v00 = inner[l][k], v10 = inner[l][k1];
            int v01 = inner[l + 1][k], v11 = inner[l + 1][k1];
            if ((k + l) % 2 == 0) {
                b.add_triangle(v00, v10, v11, 1);
                b.add_triangle(v00, v11, v01, 1);
            } else {
                b.add_triangle(v00, v10, v01, 1);
                b.add_triangle(v10, v11, v01, 1);
            }
        }
    }
    int center = b.add_vertex(c);
    for (int k = 0; k < m; ++k)
        b.add_triangle(inner[rings_in - 1][k], inner[rings_in - 1][(k + 1) % m],
                       center, 1);
}

// signed distance into the solid (positive inside the inclusion)
double solid_depth(const CellGeometry& geom, const Vec2& p) {
    switch (geom.kind) {
        case CellGeometry::Kind::none:
            return -1.0;
        case CellGeometry::Kind::disk:
            return geom.radius - (p - geom.center).norm();
        case CellGeometry::Kind::stripe:
            return std::min(p[geom.axis] - geom.stripe_lo(),
                            geom.stripe_hi() - p[geom.axis]);
    }
    return -1.0;
}

}  // namespace

double PeriodicMesh::triangle_area(int t) const {
    const auto& tr = triangles[t];
    return tri_area(vertices[tr.v[0]], vertices[tr.v[1]], vertices[tr.v[2]]);
}

Vec2 PeriodicMesh::centroid(int t) const {
    const auto& tr = triangles[t];
    return (vertices[tr.v[0]] + vertices[tr.v[1]] + vertices[tr.v[2]]) / 3.0;
}

double PeriodicMesh::total_area() const {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
        s += triangle_area(t);
    return s;
}

double PeriodicMesh::gas_area() const {
    double s = 0.0;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t)
        if (triangles[t].domain == 0) s += triangle_area(t);
    return s;
}

double PeriodicMesh::interface_length_discrete() const {
    double s = 0.0;
    for (const auto& e : interface_edges) s += e.length;
    return s;
}

PeriodicMesh mesh_cell(const CellGeometry& geom, double h) {
    if (!(h > 0.0 && h < 0.5))
        throw MeshError("mesh size h must lie in (0, 0.5)");
    MeshBuilder b;
    if (geom.kind == CellGeometry::Kind::disk)
        build_disk_mesh(b, geom, h);
    else
        build_tensor_mesh(b, geom, h);
    build_interface_edges(b.mesh());
    build_periodic_pairs(b);
    b.mesh().h = h;
    b.mesh().geometry = geom;
    validate_mesh(b.mesh());
    return std::move(b.mesh());
}

void rebuild_topology(PeriodicMesh& mesh) {
    mesh.interface_edges.clear();
    mesh.periodic_pairs.clear();
    build_interface_edges(mesh);

    std::map<VertexKey, int> index;
    for (int v = 0; v < mesh.num_vertices(); ++v)
        index.emplace(key_of(mesh.vertices[v]), v);

    const int nv = mesh.num_vertices();
    mesh.rep.assign(nv, 0);
    const double tol = 1e-12;
    for (int v = 0; v < nv; ++v) {
        Vec2 p = mesh.vertices[v];
        Vec2 target = p;
        if (std::abs(p.x() - 1.0) < tol) target.x() = 0.0;
        if (std::abs(p.y() - 1.0) < tol) target.y() = 0.0;
        if (target.x() == p.x() && target.y() == p.y()) {
            mesh.rep[v] = v;
            continue;
        }
        auto it = index.find(key_of(target));
        if (it == index.end())
            throw MeshError("periodic partner missing for boundary vertex");
        mesh.rep[v] = it->second;
        mesh.periodic_pairs.emplace_back(v, it->second);
    }
}

void validate_mesh(const PeriodicMesh& mesh) {
    const double tol = 1e-12;

    if (std::abs(mesh.total_area() - 1.0) > 1e-12)
        throw MeshError("triangle areas do not sum to 1");

    // subdomain conformity: vertices of a gas triangle may touch Gamma but not
    // lie strictly inside the solid, and vice versa
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tr = mesh.triangles[t];
        if (mesh.triangle_area(t) <= 0.0) throw MeshError("inverted triangle");
        for (int k = 0; k < 3; ++k) {
            double d = solid_depth(mesh.geometry, mesh.vertices[tr.v[k]]);
            if (tr.domain == 0 && d > 1e-10)
                throw MeshError("gas triangle reaches into the solid");
            if (tr.domain == 1 && d < -1e-10)
                throw MeshError("solid triangle reaches into the gas");
        }
    }

    // interface edges: unit normals oriented gas -> solid, endpoints on Gamma
    for (const auto& e : mesh.interface_edges) {
        if (std::abs(e.normal.norm() - 1.0) > tol)
            throw MeshError("interface normal is not unit");
        if (mesh.triangles[e.gas_tri].domain != 0 ||
            mesh.triangles[e.solid_tri].domain != 1)
            throw MeshError("interface edge adjacency tags are wrong");
        for (int v : {e.a, e.b})
            if (std::abs(solid_depth(mesh.geometry, mesh.vertices[v])) > 1e-10)
                throw MeshError("interface vertex not on Gamma");
    }

    // periodic identification: bijection with exact coordinate match
    std::set<int> masters, slaves;
    for (const auto& [s, m] : mesh.periodic_pairs) {
        if (!slaves.insert(s).second)
            throw MeshError("boundary vertex paired twice");
        Vec2 ps = mesh.vertices[s], pm = mesh.vertices[m];
        Vec2 expect = ps;
        if (std::abs(ps.x() - 1.0) < tol) expect.x() = 0.0;
        if (std::abs(ps.y() - 1.0) < tol) expect.y() = 0.0;
        if ((expect - pm).norm() > tol)
            throw MeshError("periodic pair coordinates mismatch");
        masters.insert(m);
    }
    for (int m : masters)
        if (slaves.count(m))
            throw MeshError("periodic identification is not involution-free");
}

}  // namespace homogfc
