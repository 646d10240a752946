#include "homogfc/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "homogfc/tensors.hpp"
#include "json.hpp"

namespace homogfc {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write '" + tmp + "'");
        out << content;
    }
    fs::rename(tmp, path);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string fmt(double v) {
    json j = v;  // shortest round-trip decimal
    return j.dump();
}

json mat_json(const Mat2& m) {
    return {{m(0, 0), m(0, 1)}, {m(1, 0), m(1, 1)}};
}

json table_json(const TensorTable& t) {
    json nodes = json::array();
    for (const auto& n : t.nodes)
        nodes.push_back({{"T0", n.T0},
                         {"C0", n.C0},
                         {"lambda", mat_json(n.lambda)},
                         {"D", mat_json(n.D)},
                         {"lambda_alt", mat_json(n.lambda_alt)},
                         {"D_alt", mat_json(n.D_alt)},
                         {"L_sym", mat_json(n.L_sym)},
                         {"form_discrepancy", n.form_discrepancy}});
    return {{"grid",
             {{"T0_min", t.grid.T0_min},
              {"T0_max", t.grid.T0_max},
              {"T0_points", t.grid.T0_points},
              {"C0_min", t.grid.C0_min},
              {"C0_max", t.grid.C0_max},
              {"C0_points", t.grid.C0_points}}},
            {"T0_nodes", t.T0_nodes},
            {"C0_nodes", t.C0_nodes},
            {"c_eff", t.c_eff},
            {"gas_fraction", t.gas_fraction},
            {"nodes", nodes}};
}

Mat2 mat_from_json(const json& j) {
    Mat2 m;
    m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
        j[1][1].get<double>();
    return m;
}

TensorTable table_from_json(const json& j) {
    TensorTable t;
    t.grid.T0_min = j["grid"]["T0_min"];
    t.grid.T0_max = j["grid"]["T0_max"];
    t.grid.T0_points = j["grid"]["T0_points"];
    t.grid.C0_min = j["grid"]["C0_min"];
    t.grid.C0_max = j["grid"]["C0_max"];
    t.grid.C0_points = j["grid"]["C0_points"];
    t.T0_nodes = j["T0_nodes"].get<std::vector<double>>();
    t.C0_nodes = j["C0_nodes"].get<std::vector<double>>();
    t.c_eff = j["c_eff"];
    t.gas_fraction = j["gas_fraction"];
    for (const auto& n : j["nodes"]) {
        EffectiveTensors e;
        e.T0 = n["T0"];
        e.C0 = n["C0"];
        e.lambda = mat_from_json(n["lambda"]);
        e.D = mat_from_json(n["D"]);
        e.lambda_alt = mat_from_json(n["lambda_alt"]);
        e.D_alt = mat_from_json(n["D_alt"]);
        e.L_sym = mat_from_json(n["L_sym"]);
        e.form_discrepancy = n["form_discrepancy"];
        t.nodes.push_back(e);
    }
    return t;
}

/// Shared per-run context, built lazily so cached stages stay cheap.
struct RunContext {
    const RunConfig& cfg;
    std::string dir;
    json manifest;

    bool has_mesh = false;
    PeriodicMesh mesh;
    VelocityField field;
    DriftPair drifts{};
    bool has_aux = false;
    AuxiliaryPotentials aux;
    bool has_table = false;
    TensorTable table;

    explicit RunContext(const RunConfig& c, std::string d)
        : cfg(c), dir(std::move(d)) {}

    void need_mesh() {
        if (has_mesh) return;
        mesh = mesh_cell(cfg.geometry, cfg.h);
        field = make_velocity(cfg.velocity, mesh);
        drifts = effective_drifts(cfg.materials, mesh, field);
        has_mesh = true;
    }
    void need_aux() {
        need_mesh();
        if (has_aux) return;
        aux = solve_auxiliary(cfg.materials, mesh, field, drifts);
        has_aux = true;
    }
    void need_table() {
        if (has_table) return;
        const std::string path = dir + "/table.json";
        if (fs::exists(path)) {
            table = table_from_json(json::parse(read_file(path)));
        } else {
            need_aux();
            table = build_tensor_table(cfg.materials, cfg.kinetics, mesh, field,
                                       drifts, aux, cfg.table);
        }
        has_table = true;
    }
};

json config_subset(const RunConfig& cfg, const std::vector<const char*>& keys) {
    const json all = json::parse(effective_config_json(cfg));
    json out;
    for (const char* k : keys) out[k] = all.at(k);
    return out;
}

void macro_snapshot_csv(const MacroState& s, const std::string& path) {
    std::ostringstream os;
    os << "x,y,T0,C0\n";
    for (int j = 0; j < s.N; ++j)
        for (int i = 0; i < s.N; ++i)
            os << fmt(s.box * i / s.N) << ',' << fmt(s.box * j / s.N) << ','
               << fmt(s.T0[s.idx(i, j)]) << ',' << fmt(s.C0[s.idx(i, j)])
               << '\n';
    write_file_atomic(path, os.str());
}

std::vector<double> macro_snapshot_times(const RunConfig& cfg) {
    std::vector<double> snaps = cfg.macro.snapshot_times;
    if (snaps.empty() && cfg.macro.T_f > 0.0) snaps.push_back(cfg.macro.T_f);
    return snaps;
}

MacroTrajectory run_macro_stage(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    ctx.need_table();
    MacroState init = init_macro(cfg.macro.N, cfg.macro.box, cfg.macro.T_init,
                                 cfg.macro.C_init);
    return run_macro(init, ctx.table, ctx.table.c_eff, ctx.table.gas_fraction,
                     cfg.macro.dt, cfg.macro.T_f, macro_snapshot_times(cfg),
                     ctx.drifts.b_T - ctx.drifts.b_C,
                     cfg.macro.frames_identified);
}

// ---- stage bodies ---------------------------------------------------------

std::vector<std::string> stage_scaling(RunContext& ctx) {
    const DimensionlessReport rep = dimensionless_report(ctx.cfg.scales);
    write_file_atomic(ctx.dir + "/scaling.json", rep.to_json() + "\n");
    return {"scaling.json"};
}

std::vector<std::string> stage_drifts(RunContext& ctx) {
    ctx.need_mesh();
    const auto res = compatibility_residuals(ctx.cfg.materials, ctx.mesh,
                                             ctx.field, ctx.drifts);
    json j = {{"c_eff", ctx.drifts.c_eff},
              {"b_T", {ctx.drifts.b_T.x(), ctx.drifts.b_T.y()}},
              {"b_C", {ctx.drifts.b_C.x(), ctx.drifts.b_C.y()}},
              {"residuals",
               {{"r_T", {res.r_T.x(), res.r_T.y()}},
                {"r_C", {res.r_C.x(), res.r_C.y()}},
                {"max", res.max()}}},
              {"gas_fraction", ctx.mesh.gas_area()},
              {"porosity_analytic", porosity(ctx.cfg.geometry)}};
    write_file_atomic(ctx.dir + "/drifts.json", j.dump(2) + "\n");
    return {"drifts.json"};
}

std::vector<std::string> stage_cell(RunContext& ctx) {
    ctx.need_mesh();
    const CellSolution sol =
        solve_cell_problems(ctx.cfg.materials, ctx.cfg.kinetics, ctx.mesh,
                            ctx.field, ctx.drifts, ctx.cfg.cell_T0,
                            ctx.cfg.cell_C0);
    json j = {{"T0", sol.T0},
              {"C0", sol.C0},
              {"a1", sol.a1},
              {"a2", sol.a2},
              {"residual", sol.residual},
              {"chi", {std::vector<double>(sol.chi[0].begin(), sol.chi[0].end()),
                       std::vector<double>(sol.chi[1].begin(), sol.chi[1].end())}},
              {"omega",
               {std::vector<double>(sol.omega[0].begin(), sol.omega[0].end()),
                std::vector<double>(sol.omega[1].begin(), sol.omega[1].end())}}};
    write_file_atomic(ctx.dir + "/cell.json", j.dump(2) + "\n");
    return {"cell.json"};
}

std::vector<std::string> stage_tensors(RunContext& ctx) {
    ctx.need_aux();
    const RunConfig& cfg = ctx.cfg;
    const EffectiveTensors et = compute_effective_tensors(
        cfg.materials, cfg.kinetics, ctx.mesh, ctx.field, ctx.drifts, ctx.aux,
        cfg.cell_T0, cfg.cell_C0);
    const CoercivityReport cr = coercivity_report(
        {et.lambda, et.D}, cfg.materials, cfg.kinetics.Q, ctx.mesh);
    json j = {{"T0", et.T0},
              {"C0", et.C0},
              {"lambda_eff", mat_json(et.lambda)},
              {"D_eff", mat_json(et.D)},
              {"lambda_eff_interface_form", mat_json(et.lambda_alt)},
              {"D_eff_interface_form", mat_json(et.D_alt)},
              {"L_sym", mat_json(et.L_sym)},
              {"form_discrepancy", et.form_discrepancy},
              {"coercivity", json::parse(cr.to_json())}};
    write_file_atomic(ctx.dir + "/tensors.json", j.dump(2) + "\n");

    ctx.need_table();
    write_file_atomic(ctx.dir + "/table.json",
                      table_json(ctx.table).dump(2) + "\n");

    // dispersion vs. Peclet: rescale the velocity recipe and record tensors
    json pe = json::array();
    for (double factor : {0.0, 0.5, 1.0, 2.0, 4.0}) {
        VelocityRecipe recipe = cfg.velocity;
        if (recipe.kind == VelocityRecipe::Kind::custom) break;
        recipe.mean *= factor;
        recipe.amplitude *= factor;
        const VelocityField f = make_velocity(recipe, ctx.mesh);
        const DriftPair d = effective_drifts(cfg.materials, ctx.mesh, f);
        const AuxiliaryPotentials a =
            solve_auxiliary(cfg.materials, ctx.mesh, f, d);
        const EffectiveTensors e = compute_effective_tensors(
            cfg.materials, cfg.kinetics, ctx.mesh, f, d, a, cfg.cell_T0,
            cfg.cell_C0);
        pe.push_back({{"factor", factor},
                      {"peclet", f.max_norm()},
                      {"lambda_eff", mat_json(e.lambda)},
                      {"D_eff", mat_json(e.D)}});
    }
    write_file_atomic(ctx.dir + "/peclet.json", pe.dump(2) + "\n");
    return {"tensors.json", "table.json", "peclet.json"};
}

std::vector<std::string> stage_macro(RunContext& ctx) {
    const MacroTrajectory traj = run_macro_stage(ctx);
    fs::create_directories(ctx.dir + "/macro");
    std::vector<std::string> outputs;
    for (size_t s = 0; s < traj.snapshots.size(); ++s) {
        char name[64];
        std::snprintf(name, sizeof name, "macro/snapshot_%03zu.csv", s);
        macro_snapshot_csv(traj.snapshots[s], ctx.dir + "/" + name);
        outputs.push_back(name);
    }
    json diag = json::array();
    for (const auto& d : traj.diagnostics)
        diag.push_back({{"mass_C_rel_change", d.mass_C_rel_change},
                        {"l2_T_ratio", d.l2_T_ratio},
                        {"l2_C_ratio", d.l2_C_ratio},
                        {"min_T", d.min_T},
                        {"min_C", d.min_C},
                        {"clamped_lookups", d.clamped_lookups}});
    json times = json::array();
    for (const auto& s : traj.snapshots) times.push_back(s.t);
    json j = {{"snapshot_times", times},
              {"dt", ctx.cfg.macro.dt},
              {"steps", diag}};
    write_file_atomic(ctx.dir + "/macro/diagnostics.json", j.dump(2) + "\n");
    outputs.push_back("macro/diagnostics.json");
    return outputs;
}

std::vector<std::string> stage_validate(RunContext& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.macro.box != 1.0)
        throw ConfigError(
            "validate stage: the micro torus is [0,1]^2, so macro.box must "
            "be 1");
    ctx.need_mesh();  // micro runs need the cell mesh even when the tensor
                      // table is reused from disk
    ctx.need_table();
    const MacroTrajectory macro = run_macro_stage(ctx);
    fs::create_directories(ctx.dir + "/validate");

    std::ostringstream conv;
    conv << "epsilon,rho_T,rho_C,runtime\n";
    std::vector<std::string> outputs;
    for (int n : cfg.micro.eps_denominators) {
        const auto t0 = std::chrono::steady_clock::now();
        const TiledMesh tiled = tile_mesh(ctx.mesh, n);
        const VelocityField tf = tile_velocity(tiled, ctx.field);
        const MicroRun run =
            run_micro(tiled, tf, cfg.materials, cfg.kinetics, cfg.micro.dt,
                      cfg.macro.T_f, cfg.macro.T_init, cfg.macro.C_init,
                      macro_snapshot_times(cfg));
        const FrameErrorRecord rec =
            moving_frame_error(run, macro, ctx.drifts, tiled.epsilon());
        const double runtime =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        conv << fmt(tiled.epsilon()) << ',' << fmt(std::sqrt(rec.int_rho_T_sq))
             << ',' << fmt(std::sqrt(rec.int_rho_C_sq)) << ','
             << fmt(runtime) << '\n';

        // final-time micro fields for inspection
        char name[64];
        std::snprintf(name, sizeof name, "validate/micro_T_n%02d.csv", n);
        std::ostringstream os;
        os << "x,y,T\n";
        for (int v = 0; v < tiled.mesh.num_vertices(); ++v) {
            if (tiled.mesh.rep[v] != v) continue;
            const int d = run.full.dof_of(v);
            os << fmt(tiled.mesh.vertices[v].x()) << ','
               << fmt(tiled.mesh.vertices[v].y()) << ','
               << fmt(run.T_snap.back()[d]) << '\n';
        }
        write_file_atomic(ctx.dir + "/" + name, os.str());
        outputs.push_back(name);

        json j = {{"epsilon", tiled.epsilon()},
                  {"times", rec.times},
                  {"rho_T", rec.rho_T},
                  {"rho_C", rec.rho_C},
                  {"int_rho_T_sq", rec.int_rho_T_sq},
                  {"int_rho_C_sq", rec.int_rho_C_sq},
                  {"runtime", runtime}};
        std::snprintf(name, sizeof name, "validate/errors_n%02d.json", n);
        write_file_atomic(ctx.dir + "/" + name, j.dump(2) + "\n");
        outputs.push_back(name);
    }
    write_file_atomic(ctx.dir + "/validate/convergence.csv", conv.str());
    outputs.push_back("validate/convergence.csv");
    return outputs;
}

struct StageDef {
    const char* name;
    std::vector<const char*> config_keys;  // config subsections hashed
    std::vector<const char*> deps;
    std::vector<std::string> (*body)(RunContext&);
};

const std::vector<StageDef>& stage_defs() {
    static const std::vector<StageDef> defs = {
        {"scaling", {"scales"}, {}, stage_scaling},
        {"drifts", {"geometry", "materials", "velocity"}, {}, stage_drifts},
        {"cell",
         {"geometry", "materials", "velocity", "kinetics", "cell"},
         {"drifts"},
         stage_cell},
        {"tensors",
         {"geometry", "materials", "velocity", "kinetics", "table"},
         {"drifts"},
         stage_tensors},
        {"macro",
         {"geometry", "materials", "velocity", "kinetics", "table", "macro"},
         {"tensors"},
         stage_macro},
        {"validate",
         {"geometry", "materials", "velocity", "kinetics", "table", "macro",
          "micro"},
         {"tensors", "macro"},
         stage_validate},
    };
    return defs;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir,
                            const std::vector<std::string>& stages) {
    fs::create_directories(out_dir);
    write_file_atomic(out_dir + "/effective_config.json",
                      effective_config_json(cfg));

    // resolve the requested stage set plus dependencies, in DAG order
    std::vector<std::string> want = stages;
    if (want.empty())
        for (const auto& d : stage_defs()) want.push_back(d.name);
    for (const auto& w : want) {
        bool known = false;
        for (const auto& d : stage_defs()) known = known || w == d.name;
        if (!known) throw ConfigError("unknown pipeline stage '" + w + "'");
    }
    // transitive dependency closure; defs are topologically ordered, so one
    // reverse pass marks deps of deps
    std::set<std::string> needed_set(want.begin(), want.end());
    const auto& defs = stage_defs();
    for (auto it = defs.rbegin(); it != defs.rend(); ++it)
        if (needed_set.count(it->name))
            for (const char* dep : it->deps) needed_set.insert(dep);
    auto requested = [&needed_set](const std::string& name) {
        return needed_set.count(name) != 0;
    };

    RunContext ctx(cfg, out_dir);
    const std::string manifest_path = out_dir + "/manifest.json";
    if (fs::exists(manifest_path))
        ctx.manifest = json::parse(read_file(manifest_path));

    PipelineResult result;
    std::vector<std::string> hashes;  // per executed/loaded stage, by name
    json stage_hash = json::object();

    for (const auto& def : stage_defs()) {
        bool needed = requested(def.name);
        for (const auto& d : stage_defs())
            if (requested(d.name))
                for (const char* dep : d.deps)
                    if (std::string(dep) == def.name) needed = true;
        if (!needed) continue;

        std::string input = def.name;
        input += config_subset(cfg, def.config_keys).dump();
        if (cfg.velocity.kind == VelocityRecipe::Kind::custom)
            input += read_file(cfg.velocity.file);
        for (const char* dep : def.deps)
            input += stage_hash.value(dep, std::string("missing"));
        const std::string h = hex(fnv1a(input));
        stage_hash[def.name] = h;

        StageResult sr;
        sr.name = def.name;
        sr.hash = h;
        bool cached = false;
        if (ctx.manifest.contains(def.name) &&
            ctx.manifest[def.name].value("hash", "") == h) {
            cached = true;
            for (const auto& f : ctx.manifest[def.name]["outputs"]) {
                if (!fs::exists(out_dir + "/" + f.get<std::string>()))
                    cached = false;
                sr.outputs.push_back(f.get<std::string>());
            }
        }
        if (cached) {
            sr.cached = true;
        } else {
            sr.outputs = def.body(ctx);
            ctx.manifest[def.name] = {{"hash", h}, {"outputs", sr.outputs}};
            write_file_atomic(manifest_path, ctx.manifest.dump(2) + "\n");
        }
        result.stages.push_back(std::move(sr));
    }
    return result;
}

void emit_plot_data(const std::string& dir) {
    bool wrote_any = false;

    if (fs::exists(dir + "/validate/convergence.csv")) {
        // one row per epsilon, already tidy; re-emit under the plot name
        write_file_atomic(dir + "/rho_vs_eps.csv",
                          read_file(dir + "/validate/convergence.csv"));
        wrote_any = true;
    }

    if (fs::exists(dir + "/table.json")) {
        const TensorTable t =
            table_from_json(json::parse(read_file(dir + "/table.json")));
        std::ostringstream os;
        os << "T0";
        for (double c0 : t.C0_nodes) os << ",C0=" << fmt(c0);
        os << '\n';
        for (size_t it = 0; it < t.T0_nodes.size(); ++it) {
            os << fmt(t.T0_nodes[it]);
            for (size_t ic = 0; ic < t.C0_nodes.size(); ++ic)
                os << ',' << fmt(t.at(static_cast<int>(it),
                                      static_cast<int>(ic)).lambda(0, 0));
            os << '\n';
        }
        write_file_atomic(dir + "/lambda_eff_11_vs_T0.csv", os.str());

        std::ostringstream od;
        od << "C0";
        for (double t0 : t.T0_nodes) od << ",T0=" << fmt(t0);
        od << '\n';
        for (size_t ic = 0; ic < t.C0_nodes.size(); ++ic) {
            od << fmt(t.C0_nodes[ic]);
            for (size_t it = 0; it < t.T0_nodes.size(); ++it)
                od << ',' << fmt(t.at(static_cast<int>(it),
                                      static_cast<int>(ic)).D(0, 0));
            od << '\n';
        }
        write_file_atomic(dir + "/D_eff_11_vs_C0.csv", od.str());
        wrote_any = true;
    }

    if (fs::exists(dir + "/peclet.json")) {
        const json pe = json::parse(read_file(dir + "/peclet.json"));
        std::ostringstream os;
        os << "factor,peclet,lambda_11,lambda_22,D_11,D_22\n";
        for (const auto& row : pe)
            os << fmt(row["factor"]) << ',' << fmt(row["peclet"]) << ','
               << fmt(row["lambda_eff"][0][0]) << ','
               << fmt(row["lambda_eff"][1][1]) << ','
               << fmt(row["D_eff"][0][0]) << ',' << fmt(row["D_eff"][1][1])
               << '\n';
        write_file_atomic(dir + "/tensors_vs_peclet.csv", os.str());
        wrote_any = true;
    }

    // mid-row slice of the final macro snapshot
    std::string last_snap;
    if (fs::is_directory(dir + "/macro"))
        for (const auto& e : fs::directory_iterator(dir + "/macro")) {
            const std::string n = e.path().filename().string();
            if (n.rfind("snapshot_", 0) == 0 && (last_snap.empty() || n > last_snap))
                last_snap = n;
        }
    if (!last_snap.empty()) {
        std::istringstream in(read_file(dir + "/macro/" + last_snap));
        std::string line;
        std::getline(in, line);  // header
        std::ostringstream os;
        os << "x,T0,C0\n";
        while (std::getline(in, line)) {
            double x, y, T, C;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &x, &y, &T, &C) ==
                    4 &&
                y == 0.5)
                os << fmt(x) << ',' << fmt(T) << ',' << fmt(C) << '\n';
        }
        write_file_atomic(dir + "/macro_midline.csv", os.str());
        wrote_any = true;
    }

    if (!wrote_any)
        throw ConfigError(
            "plot data: no artifacts found in '" + dir +
            "'; run the pipeline stages (tensors, macro, validate) first");
}

}  // namespace homogfc
