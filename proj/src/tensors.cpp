#include "homogfc/tensors.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "homogfc/errors.hpp"

namespace homogfc {

namespace {

double min_eig_sym(const Mat2& M) {
    const Mat2 S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat2> es(S);
    return es.eigenvalues().minCoeff();
}

double max_eig_sym(const Mat2& M) {
    const Mat2 S = 0.5 * (M + M.transpose());
    Eigen::SelfAdjointEigenSolver<Mat2> es(S);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

TensorPair tensors_interface_form(const CellSolution& sol,
                                  const MaterialParams& p, double Q, double A) {
    const PeriodicMesh& mesh = *sol.full.mesh;
    TensorPair out;
    out.lambda.setZero();
    out.D.setZero();

    // volume terms: int coeff (e_i + grad u_i) . (e_j + grad u_j)
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = mesh.triangle_area(t);
        const double lam = tri.domain == 0 ? p.lambda_g : p.lambda_s;
        Vec2 gchi[2];
        for (int i = 0; i < 2; ++i) gchi[i] = grad_p1(sol.full, sol.chi[i], t);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.lambda(i, j) += lam * a *
                                    (Vec2::Unit(i) + gchi[i])
                                        .dot(Vec2::Unit(j) + gchi[j]);
        if (tri.domain == 0) {
            Vec2 gom[2];
            for (int i = 0; i < 2; ++i)
                gom[i] = grad_p1(sol.gas, sol.omega[i], t);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    out.D(i, j) += p.D * a *
                                   (Vec2::Unit(i) + gom[i])
                                       .dot(Vec2::Unit(j) + gom[j]);
        }
    }

    // surface coupling terms
    if (A > 0.0 && !mesh.interface_edges.empty()) {
        const SpMat Ghh = assemble_interface_mass(sol.full, sol.full);
        const SpMat Gmh = assemble_interface_mass(sol.gas, sol.full);
        const SpMat Gmm = assemble_interface_mass(sol.gas, sol.gas);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double cc = sol.chi[i].dot(Ghh * sol.chi[j]);
                const double oc = sol.omega[i].dot(Gmh * sol.chi[j]);
                const double oo = sol.omega[i].dot(Gmm * sol.omega[j]);
                out.lambda(i, j) += Q * A * (sol.a1 * cc + sol.a2 * oc);
                out.D(i, j) -= A * (sol.a2 * oo + sol.a1 * oc);
            }
        }
    }
    return out;
}

TensorPair tensors_divergence_form(const CellSolution& sol,
                                   const AuxiliaryPotentials& aux,
                                   const MaterialParams& p) {
    const PeriodicMesh& mesh = *sol.full.mesh;
    if (aux.full.mesh != &mesh)
        throw NumericalError(
            "divergence-form tensors: auxiliary potentials live on a "
            "different mesh than the cell solution");
    TensorPair out;
    out.lambda.setZero();
    out.D.setZero();

    double int_lambda = 0.0, int_D = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[t];
        const double a = mesh.triangle_area(t);
        const double lam = tri.domain == 0 ? p.lambda_g : p.lambda_s;
        int_lambda += lam * a;
        for (int j = 0; j < 2; ++j) {
            const Vec2 g = grad_p1(sol.full, sol.chi[j], t);
            for (int i = 0; i < 2; ++i) out.lambda(i, j) += lam * a * g[i];
        }
        if (tri.domain == 0) {
            int_D += p.D * a;
            for (int j = 0; j < 2; ++j) {
                const Vec2 g = grad_p1(sol.gas, sol.omega[j], t);
                for (int i = 0; i < 2; ++i) out.D(i, j) += p.D * a * g[i];
            }
        }
    }
    const SpMat Kfull = assemble_stiffness(sol.full, 1.0, 1.0);
    const SpMat Kgas = assemble_stiffness(sol.gas, 1.0, 0.0);
    for (int i = 0; i < 2; ++i) {
        out.lambda(i, i) += int_lambda;
        out.D(i, i) += int_D;
        for (int j = 0; j < 2; ++j) {
            out.lambda(i, j) += aux.Pi[i].dot(Kfull * sol.chi[j]);
            out.D(i, j) += aux.Sigma[i].dot(Kgas * sol.omega[j]);
        }
    }
    return out;
}

SymTensorCheck symmetric_part_tensor(const TensorPair& t,
                                     const CellSolution& sol,
                                     const MaterialParams& p, double Q,
                                     double A) {
    SymTensorCheck chk;
    const Mat2 L = t.lambda + Q * t.D;
    chk.L_sym = 0.5 * (L + L.transpose());

    // direct route: volume energy terms plus the closed symmetric surface
    // combination QA[(a2-a1) sym(omega chi) + a1 chi chi - a2 omega omega]
    const PeriodicMesh& mesh = *sol.full.mesh;
    Mat2 direct = Mat2::Zero();
    for (int tr = 0; tr < static_cast<int>(mesh.triangles.size()); ++tr) {
        const auto& tri = mesh.triangles[tr];
        const double a = mesh.triangle_area(tr);
        const double lam = tri.domain == 0 ? p.lambda_g : p.lambda_s;
        Vec2 gchi[2];
        for (int i = 0; i < 2; ++i) gchi[i] = grad_p1(sol.full, sol.chi[i], tr);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                direct(i, j) += lam * a *
                                (Vec2::Unit(i) + gchi[i])
                                    .dot(Vec2::Unit(j) + gchi[j]);
        if (tri.domain == 0) {
            Vec2 gom[2];
            for (int i = 0; i < 2; ++i)
                gom[i] = grad_p1(sol.gas, sol.omega[i], tr);
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    direct(i, j) += Q * p.D * a *
                                    (Vec2::Unit(i) + gom[i])
                                        .dot(Vec2::Unit(j) + gom[j]);
        }
    }
    if (A > 0.0 && !mesh.interface_edges.empty()) {
        const SpMat Ghh = assemble_interface_mass(sol.full, sol.full);
        const SpMat Gmh = assemble_interface_mass(sol.gas, sol.full);
        const SpMat Gmm = assemble_interface_mass(sol.gas, sol.gas);
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                const double cc = sol.chi[i].dot(Ghh * sol.chi[j]);
                const double oo = sol.omega[i].dot(Gmm * sol.omega[j]);
                const double oc_sym =
                    0.5 * (sol.omega[i].dot(Gmh * sol.chi[j]) +
                           sol.omega[j].dot(Gmh * sol.chi[i]));
                direct(i, j) += Q * A *
                                ((sol.a2 - sol.a1) * oc_sym + sol.a1 * cc -
                                 sol.a2 * oo);
            }
        }
    }
    chk.L_sym_direct = direct;
    chk.difference = (chk.L_sym - direct).cwiseAbs().maxCoeff();
    return chk;
}

CoercivityReport coercivity_report(const TensorPair& t,
                                   const MaterialParams& p, double Q,
                                   const PeriodicMesh& mesh) {
    double int_lg = 0.0, int_ls = 0.0, int_D = 0.0;
    for (int tr = 0; tr < static_cast<int>(mesh.triangles.size()); ++tr) {
        const double a = mesh.triangle_area(tr);
        if (mesh.triangles[tr].domain == 0) {
            int_lg += p.lambda_g * a;
            int_D += p.D * a;
        } else {
            int_ls += p.lambda_s * a;
        }
    }
    CoercivityReport r;
    r.lam_min_eig = min_eig_sym(t.lambda);
    r.lam_lower_bound = int_lg + int_ls;
    r.D_min_eig = min_eig_sym(t.D);
    r.D_lower_bound = std::min(int_lg, int_ls) / Q;
    r.D_max_eig = max_eig_sym(t.D);
    r.D_upper_bound = int_D;
    r.lam_lower_ok = r.lam_min_eig >= r.lam_lower_bound - 1e-12;
    r.D_lower_ok = r.D_min_eig >= r.D_lower_bound - 1e-12;
    r.D_upper_ok = r.D_max_eig <= r.D_upper_bound + 1e-12;
    r.positive_definite = r.lam_min_eig > 0.0 && r.D_min_eig > 0.0;
    return r;
}

std::string CoercivityReport::to_json() const {
    std::ostringstream os;
    os.precision(17);
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "{\"lam_min_eig\":" << lam_min_eig
       << ",\"lam_lower_bound\":" << lam_lower_bound
       << ",\"D_min_eig\":" << D_min_eig
       << ",\"D_lower_bound\":" << D_lower_bound
       << ",\"D_max_eig\":" << D_max_eig
       << ",\"D_upper_bound\":" << D_upper_bound
       << ",\"lam_lower_ok\":" << b(lam_lower_ok)
       << ",\"D_lower_ok\":" << b(D_lower_ok)
       << ",\"D_upper_ok\":" << b(D_upper_ok)
       << ",\"positive_definite\":" << b(positive_definite) << "}";
    return os.str();
}

EffectiveTensors compute_effective_tensors(const MaterialParams& p,
                                           const KineticsParams& k,
                                           const PeriodicMesh& mesh,
                                           const VelocityField& field,
                                           const DriftPair& drifts,
                                           const AuxiliaryPotentials& aux,
                                           double T0, double C0) {
    const CellSolution sol =
        solve_cell_problems(p, k, mesh, field, drifts, T0, C0);
    const TensorPair div = tensors_divergence_form(sol, aux, p);
    const TensorPair itf = tensors_interface_form(sol, p, k.Q, k.A);

    EffectiveTensors out;
    out.lambda = div.lambda;
    out.D = div.D;
    out.lambda_alt = itf.lambda;
    out.D_alt = itf.D;
    out.T0 = T0;
    out.C0 = C0;
    const Mat2 L = div.lambda + k.Q * div.D;
    out.L_sym = 0.5 * (L + L.transpose());
    const double scale =
        std::max(div.lambda.cwiseAbs().maxCoeff(), div.D.cwiseAbs().maxCoeff());
    out.form_discrepancy =
        std::max((div.lambda - itf.lambda).cwiseAbs().maxCoeff(),
                 (div.D - itf.D).cwiseAbs().maxCoeff()) /
        scale;
    return out;
}

const EffectiveTensors& TensorTable::at(int it, int ic) const {
    return nodes[static_cast<size_t>(it) * C0_nodes.size() + ic];
}

TensorPair TensorTable::lookup(double T0, double C0) const {
    const int nT = static_cast<int>(T0_nodes.size());
    const int nC = static_cast<int>(C0_nodes.size());
    // clamp into the grid, interpolate bilinearly in (log T0, C0)
    bool clamped = false;
    auto bracket = [&clamped](const std::vector<double>& xs, double x, int& i0,
                              double& w) {
        const int n = static_cast<int>(xs.size());
        if (n == 1 || x <= xs.front()) {
            if (x < xs.front() || (n == 1 && x > xs.front())) clamped = true;
            i0 = 0;
            w = 0.0;
            return;
        }
        if (x >= xs.back()) {
            if (x > xs.back()) clamped = true;
            i0 = n - 2;
            w = 1.0;
            return;
        }
        i0 = static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) -
                              xs.begin()) - 1;
        w = (x - xs[i0]) / (xs[i0 + 1] - xs[i0]);
    };
    std::vector<double> logT(T0_nodes.size());
    for (size_t i = 0; i < T0_nodes.size(); ++i) logT[i] = std::log(T0_nodes[i]);
    int it, ic;
    double wt, wc;
    bracket(logT, std::log(std::max(T0, 1e-300)), it, wt);
    bracket(C0_nodes, C0, ic, wc);
    if (clamped) ++clamped_lookups;
    const int it1 = std::min(it + 1, nT - 1);
    const int ic1 = std::min(ic + 1, nC - 1);

    TensorPair out;
    out.lambda = (1 - wt) * (1 - wc) * at(it, ic).lambda +
                 (1 - wt) * wc * at(it, ic1).lambda +
                 wt * (1 - wc) * at(it1, ic).lambda +
                 wt * wc * at(it1, ic1).lambda;
    out.D = (1 - wt) * (1 - wc) * at(it, ic).D +
            (1 - wt) * wc * at(it, ic1).D + wt * (1 - wc) * at(it1, ic).D +
            wt * wc * at(it1, ic1).D;
    return out;
}

TensorTable build_tensor_table(const MaterialParams& p, const KineticsParams& k,
                               const PeriodicMesh& mesh,
                               const VelocityField& field,
                               const DriftPair& drifts,
                               const AuxiliaryPotentials& aux,
                               const TableGrid& grid) {
    if (grid.T0_points < 1 || grid.C0_points < 1)
        throw ConfigError("tensor table: grid must have at least one node");
    if (!(grid.T0_min > 0.0) || grid.T0_max < grid.T0_min)
        throw ConfigError("tensor table: T0 range must satisfy 0 < min <= max");
    if (grid.C0_min < 0.0 || grid.C0_max < grid.C0_min)
        throw ConfigError("tensor table: C0 range must satisfy 0 <= min <= max");

    TensorTable tab;
    tab.grid = grid;
    for (int i = 0; i < grid.T0_points; ++i) {
        const double s = grid.T0_points == 1
                             ? 0.0
                             : static_cast<double>(i) / (grid.T0_points - 1);
        tab.T0_nodes.push_back(
            grid.T0_min * std::pow(grid.T0_max / grid.T0_min, s));
    }
    for (int i = 0; i < grid.C0_points; ++i) {
        const double s = grid.C0_points == 1
                             ? 0.0
                             : static_cast<double>(i) / (grid.C0_points - 1);
        tab.C0_nodes.push_back(grid.C0_min + s * (grid.C0_max - grid.C0_min));
    }

    double gas_area = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t)
        if (mesh.triangles[t].domain == 0) gas_area += mesh.triangle_area(t);
    tab.gas_fraction = gas_area;
    tab.c_eff = p.c_g * gas_area + p.c_s * (1.0 - gas_area);

    for (double T0 : tab.T0_nodes) {
        for (double C0 : tab.C0_nodes) {
            EffectiveTensors et = compute_effective_tensors(
                p, k, mesh, field, drifts, aux, T0, C0);
            if (min_eig_sym(et.lambda) <= 0.0 || min_eig_sym(et.D) <= 0.0)
                throw NumericalError(
                    "tensor table: symmetric part not positive definite at "
                    "node (T0=" + std::to_string(T0) +
                    ", C0=" + std::to_string(C0) + ")");
            tab.nodes.push_back(std::move(et));
        }
    }
    return tab;
}

}  // namespace homogfc
