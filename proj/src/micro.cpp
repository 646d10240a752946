#include "homogfc/micro.hpp"

#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>

#include "homogfc/errors.hpp"

namespace homogfc {

namespace {

// same coordinate quantization as the cell mesher, so shared tile faces
// deduplicate bitwise
long long quant(double x) {
    const double scale = 1llu << 48;
    return static_cast<long long>(std::llround(x * scale));
}

// diagonal (lumped) mass with per-subdomain coefficient
Vec lumped_mass(const FeSpace& space, double coeff_gas, double coeff_solid) {
    const PeriodicMesh& mesh = *space.mesh;
    Vec m = Vec::Zero(space.n);
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        if (!space.covers(tri.domain)) continue;
        const double c = tri.domain == 0 ? coeff_gas : coeff_solid;
        const double w = c * mesh.triangle_area(t) / 3.0;
        for (int i = 0; i < 3; ++i) m[space.dof_of(tri.v[i])] += w;
    }
    return m;
}

std::vector<int> dof_vertices(const FeSpace& space) {
    std::vector<int> vert(space.n, -1);
    for (int v = 0; v < space.mesh->num_vertices(); ++v)
        if (space.mesh->rep[v] == v && space.dof[v] >= 0)
            vert[space.dof[v]] = v;
    return vert;
}

}  // namespace

TiledMesh tile_mesh(const PeriodicMesh& cell, int n) {
    if (n < 1) throw ConfigError("tiling: n must be a positive integer");
    TiledMesh out;
    out.n = n;
    PeriodicMesh& m = out.mesh;
    m.h = cell.h / n;
    m.geometry = cell.geometry;

    std::map<std::pair<long long, long long>, int> index;
    out.vertex_map.assign(static_cast<size_t>(n) * n,
                          std::vector<int>(cell.num_vertices()));
    for (int tj = 0; tj < n; ++tj) {
        for (int ti = 0; ti < n; ++ti) {
            auto& vmap = out.vertex_map[ti + n * tj];
            for (int v = 0; v < cell.num_vertices(); ++v) {
                const Vec2 p = (cell.vertices[v] + Vec2(ti, tj)) / n;
                auto key = std::make_pair(quant(p.x()), quant(p.y()));
                auto it = index.find(key);
                if (it != index.end()) {
                    vmap[v] = it->second;
                } else {
                    vmap[v] = static_cast<int>(m.vertices.size());
                    m.vertices.push_back(p);
                    index.emplace(key, vmap[v]);
                }
            }
            for (const auto& tri : cell.triangles)
                m.triangles.push_back(
                    {{vmap[tri.v[0]], vmap[tri.v[1]], vmap[tri.v[2]]},
                     tri.domain});
        }
    }
    rebuild_topology(m);

    if (std::abs(m.total_area() - 1.0) > 1e-10)
        throw MeshError("tiling: areas do not sum to the torus area");
    if (m.interface_edges.size() !=
        static_cast<size_t>(n) * n * cell.interface_edges.size())
        throw MeshError("tiling: interface edge count mismatch");
    return out;
}

VelocityField tile_velocity(const TiledMesh& tiled,
                            const VelocityField& cell_field) {
    const PeriodicMesh& cell = *cell_field.mesh;
    VelocityField f;
    f.mesh = &tiled.mesh;
    f.mean = cell_field.mean;
    f.stream = Vec::Zero(tiled.mesh.num_vertices());
    for (size_t tile = 0; tile < tiled.vertex_map.size(); ++tile)
        for (int v = 0; v < cell.num_vertices(); ++v)
            f.stream[tiled.vertex_map[tile][v]] =
                cell_field.stream[v] / tiled.n;
    validate_velocity(f);
    return f;
}

MicroRun run_micro(const TiledMesh& tiled, const VelocityField& tiled_field,
                   const MaterialParams& p, const KineticsParams& k, double dt,
                   double T_f, const ProfileSpec& T_init,
                   const ProfileSpec& C_init,
                   const std::vector<double>& snapshot_times) {
    if (!(dt > 0.0)) throw ConfigError("micro run: dt must be > 0");
    const long steps = std::lround(T_f / dt);
    if (steps < 0 || std::abs(steps * dt - T_f) > 1e-9 * std::max(T_f, dt))
        throw ConfigError("micro run: horizon must be a multiple of dt");
    const double eps = tiled.epsilon();

    MicroRun run;
    run.tiled = &tiled;
    run.full = make_space_full(tiled.mesh);
    run.gas = make_space_gas(tiled.mesh);
    const FeSpace& fs = run.full;
    const FeSpace& gs = run.gas;

    const Vec Mh = lumped_mass(fs, p.c_g, p.c_s);
    const Vec Mm = lumped_mass(gs, 1.0, 0.0);
    const SpMat Kh = assemble_stiffness(fs, p.lambda_g, p.lambda_s);
    const SpMat Km = assemble_stiffness(gs, p.D, 0.0);
    const SpMat Bh = assemble_convection(fs, tiled_field, p.c_g / eps);
    const SpMat Bm = assemble_convection(gs, tiled_field, 1.0 / eps);

    SpMat Ah = Kh + Bh;
    for (int i = 0; i < fs.n; ++i) Ah.coeffRef(i, i) += Mh[i] / dt;
    Ah.makeCompressed();
    Eigen::SparseLU<SpMat> luT;
    luT.compute(Ah);
    if (luT.info() != Eigen::Success)
        throw NumericalError("micro run: heat operator factorization failed; "
                             "try a smaller dt");

    Eigen::SparseLU<SpMat> luC;
    bool luC_analyzed = false;

    const std::vector<int> vh = dof_vertices(fs);
    const std::vector<int> vm = dof_vertices(gs);
    Vec T(fs.n), C(gs.n);
    for (int d = 0; d < fs.n; ++d)
        T[d] = eval_profile(T_init, tiled.mesh.vertices[vh[d]], 1.0);
    for (int d = 0; d < gs.n; ++d)
        C[d] = eval_profile(C_init, tiled.mesh.vertices[vm[d]], 1.0);
    if (!(T.minCoeff() > 0.0))
        throw ConfigError("micro run: initial temperature must be positive");
    if (C.minCoeff() < 0.0)
        throw ConfigError("micro run: initial concentration must be >= 0");

    run.times.push_back(0.0);
    run.T_snap.push_back(T);
    run.C_snap.push_back(C);
    std::vector<long> snap_steps;
    for (double t : snapshot_times)
        if (t > 0.0) snap_steps.push_back(std::lround(t / dt));

    const bool reactive = k.A > 0.0 && !tiled.mesh.interface_edges.empty();
    for (long step = 0; step < steps; ++step) {
        // Arrhenius factor lagged at t_n, nodal on the heat space
        Vec fT;
        SpMat Gmm, Ghm;
        if (reactive) {
            fT.resize(fs.n);
            for (int d = 0; d < fs.n; ++d) fT[d] = arrhenius_f(T[d], k.T_a);
            Vec fT_gas = Vec::Zero(gs.n);
            for (int d = 0; d < gs.n; ++d)
                fT_gas[d] = fT[fs.dof_of(vm[d])];
            Gmm = assemble_interface_mass_weighted(gs, gs, fT_gas);
            Ghm = assemble_interface_mass_weighted(fs, gs, fT);
        }

        // concentration first: implicit in C with the lagged factor
        SpMat Am = Km + Bm;
        if (reactive) Am = Am + (k.A / eps) * Gmm;
        for (int i = 0; i < gs.n; ++i) Am.coeffRef(i, i) += Mm[i] / dt;
        Am.makeCompressed();
        if (!luC_analyzed) {
            luC.analyzePattern(Am);
            luC_analyzed = true;
        }
        luC.factorize(Am);
        if (luC.info() != Eigen::Success)
            throw NumericalError(
                "micro run: concentration factorization failed; try dt = " +
                std::to_string(dt / 2));
        const Vec rhsC = Mm.cwiseProduct(C) / dt;
        const Vec Cn = C;
        C = luC.solve(rhsC);

        // temperature with the fresh concentration in the interface source
        Vec rhsT = Mh.cwiseProduct(T) / dt;
        if (reactive) rhsT += (k.Q * k.A / eps) * (Ghm * C);
        const Vec Tn = T;
        T = luT.solve(rhsT);

        MicroStepReport rep;
        const Vec rT = Ah * T - rhsT;
        const Vec rC = Am * C - rhsC;
        const double scaleT = std::max(rhsT.norm(), 1e-30);
        const double scaleC = std::max(rhsC.norm(), 1e-30);
        rep.solve_residual =
            std::max(rT.norm() / scaleT, rC.norm() / scaleC);
        if (rep.solve_residual > 1e-8)
            throw NumericalError(
                "micro run: step residual " +
                std::to_string(rep.solve_residual) + "; try dt = " +
                std::to_string(dt / 2));

        // exact discrete energy identity, tested with the new iterates:
        //   T' M (T'-T)/dt + T' B T' + T' K T' - (QA/eps) T' G C'  = T' rT
        //   and Q times the concentration analogue; the sum of all terms
        //   equals the combined solver residual.
        const double massT = T.dot(Mh.cwiseProduct(T - Tn)) / dt;
        const double convT = T.dot(Bh * T);
        const double dissT = T.dot(Kh * T);
        const double srcT = reactive ? (k.Q * k.A / eps) * T.dot(Ghm * C) : 0.0;
        const double massC = C.dot(Mm.cwiseProduct(C - Cn)) / dt;
        const double convC = C.dot(Bm * C);
        const double dissC = C.dot(Km * C);
        const double sinkC = reactive ? (k.A / eps) * C.dot(Gmm * C) : 0.0;
        const double defect = (massT + convT + dissT - srcT) +
                              k.Q * (massC + convC + dissC + sinkC);
        const double escale =
            std::abs(massT) + std::abs(dissT) + std::abs(srcT) +
            k.Q * (std::abs(massC) + std::abs(dissC) + std::abs(sinkC)) +
            (T.dot(Mh.cwiseProduct(T)) + k.Q * C.dot(Mm.cwiseProduct(C))) / dt;
        rep.energy_residual = std::abs(defect) / std::max(escale, 1e-30);
        rep.convection_skewness =
            (std::abs(convT) + k.Q * std::abs(convC)) / std::max(escale, 1e-30);
        rep.min_T = T.minCoeff();
        rep.min_C = C.minCoeff();
        if (reactive) {
            double dmax = 0.0, fmax = 1e-300;
            for (int d = 0; d < fs.n; ++d) {
                dmax = std::max(dmax, std::abs(arrhenius_f(T[d], k.T_a) - fT[d]));
                fmax = std::max(fmax, fT[d]);
            }
            rep.reaction_factor_change = dmax / fmax;
        }
        if (rep.energy_residual > 1e-8)
            throw InvariantError("micro run: energy identity defect " +
                                 std::to_string(rep.energy_residual));
        const double cscale = std::max(Cn.cwiseAbs().maxCoeff(), 1.0);
        if (rep.min_C < -1e-10 * cscale)
            throw InvariantError("micro run: concentration undershoot " +
                                 std::to_string(rep.min_C));
        if (!(rep.min_T > 0.0))
            throw InvariantError("micro run: temperature lost positivity");
        run.steps.push_back(rep);

        for (long ss : snap_steps)
            if (ss == step + 1) {
                run.times.push_back((step + 1) * dt);
                run.T_snap.push_back(T);
                run.C_snap.push_back(C);
            }
    }
    if (snap_steps.empty() && steps > 0) {
        run.times.push_back(steps * dt);
        run.T_snap.push_back(T);
        run.C_snap.push_back(C);
    }
    return run;
}

FrameErrorRecord moving_frame_error(const MicroRun& micro,
                                    const MacroTrajectory& macro,
                                    const DriftPair& drifts, double epsilon) {
    FrameErrorRecord rec;
    const std::vector<int> vh = dof_vertices(micro.full);
    const std::vector<int> vm = dof_vertices(micro.gas);

    for (size_t s = 0; s < micro.times.size(); ++s) {
        const double t = micro.times[s];
        const MacroState* ms = nullptr;
        for (const auto& snap : macro.snapshots)
            if (std::abs(snap.t - t) <= 1e-9) { ms = &snap; break; }
        if (!ms)
            throw ConfigError(
                "frame error: no macro snapshot at t = " + std::to_string(t));

        const Vec2 shiftT = drifts.b_T * (t / epsilon);
        const Vec2 shiftC = drifts.b_C * (t / epsilon);
        double sT = 0.0, sC = 0.0;
        for (int d = 0; d < micro.full.n; ++d) {
            const Vec2 x = micro.tiled->mesh.vertices[vh[d]];
            const double ref = interp_macro(*ms, ms->T0, x - shiftT);
            const double diff = micro.T_snap[s][d] - ref;
            sT += micro.full.weight[d] * diff * diff;
        }
        for (int d = 0; d < micro.gas.n; ++d) {
            const Vec2 x = micro.tiled->mesh.vertices[vm[d]];
            const double ref = interp_macro(*ms, ms->C0, x - shiftC);
            const double diff = micro.C_snap[s][d] - ref;
            sC += micro.gas.weight[d] * diff * diff;
        }
        rec.times.push_back(t);
        rec.rho_T.push_back(std::sqrt(sT));
        rec.rho_C.push_back(std::sqrt(sC));
    }
    for (size_t s = 0; s + 1 < rec.times.size(); ++s) {
        const double w = 0.5 * (rec.times[s + 1] - rec.times[s]);
        rec.int_rho_T_sq += w * (rec.rho_T[s] * rec.rho_T[s] +
                                 rec.rho_T[s + 1] * rec.rho_T[s + 1]);
        rec.int_rho_C_sq += w * (rec.rho_C[s] * rec.rho_C[s] +
                                 rec.rho_C[s + 1] * rec.rho_C[s + 1]);
    }
    return rec;
}

}  // namespace homogfc
