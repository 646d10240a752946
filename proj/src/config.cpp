#include "homogfc/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace homogfc {

using nlohmann::json;

namespace {

json profile_json(const ProfileSpec& p) {
    if (p.kind == ProfileSpec::Kind::constant)
        return {{"type", "constant"}, {"value", p.value}};
    return {{"type", "gaussian"},
            {"center", {p.center.x(), p.center.y()}},
            {"width", p.width},
            {"amplitude", p.amplitude},
            {"floor", p.floor}};
}

json geometry_json(const CellGeometry& g) {
    switch (g.kind) {
        case CellGeometry::Kind::none:
            return {{"type", "none"}};
        case CellGeometry::Kind::disk:
            return {{"type", "disk"},
                    {"center", {g.center.x(), g.center.y()}},
                    {"radius", g.radius}};
        case CellGeometry::Kind::stripe:
            return {{"type", "stripe"},
                    {"axis", g.axis},
                    {"fraction", g.fraction}};
    }
    return {};
}

json config_json(const RunConfig& c) {
    json j;
    j["geometry"] = {{"inclusion", geometry_json(c.geometry)}, {"h", c.h}};
    j["materials"] = {{"c_g", c.materials.c_g},
                      {"c_s", c.materials.c_s},
                      {"lambda_g", c.materials.lambda_g},
                      {"lambda_s", c.materials.lambda_s},
                      {"D", c.materials.D}};
    j["kinetics"] = {
        {"A", c.kinetics.A}, {"T_a", c.kinetics.T_a}, {"Q", c.kinetics.Q}};
    json v;
    switch (c.velocity.kind) {
        case VelocityRecipe::Kind::constant:
            v = {{"type", "constant"},
                 {"mean", {c.velocity.mean.x(), c.velocity.mean.y()}}};
            break;
        case VelocityRecipe::Kind::cellular:
            v = {{"type", "cellular"}, {"amplitude", c.velocity.amplitude}};
            break;
        case VelocityRecipe::Kind::custom:
            v = {{"type", "custom"}, {"file", c.velocity.file}};
            break;
    }
    j["velocity"] = v;
    j["scales"] = {{"L", c.scales.L},          {"b_c", c.scales.b_c},
                   {"D_c", c.scales.D_c},      {"lambda_gc", c.scales.lambda_gc},
                   {"c_gc", c.scales.c_gc},    {"c_sc", c.scales.c_sc},
                   {"lambda_sc", c.scales.lambda_sc},
                   {"A_c", c.scales.A_c},      {"Q_c", c.scales.Q_c},
                   {"C_c", c.scales.C_c},      {"epsilon", c.scales.epsilon}};
    j["cell"] = {{"T0", c.cell_T0}, {"C0", c.cell_C0}};
    j["table"] = {{"T0_min", c.table.T0_min},   {"T0_max", c.table.T0_max},
                  {"T0_points", c.table.T0_points},
                  {"C0_min", c.table.C0_min},   {"C0_max", c.table.C0_max},
                  {"C0_points", c.table.C0_points}};
    j["macro"] = {{"N", c.macro.N},
                  {"box", c.macro.box},
                  {"dt", c.macro.dt},
                  {"T_f", c.macro.T_f},
                  {"snapshot_times", c.macro.snapshot_times},
                  {"frames", c.macro.frames_identified ? "identified" : "offset"},
                  {"T_init", profile_json(c.macro.T_init)},
                  {"C_init", profile_json(c.macro.C_init)}};
    j["micro"] = {{"eps_denominators", c.micro.eps_denominators},
                  {"dt", c.micro.dt}};
    return j;
}

[[noreturn]] void fail(const std::string& msg) { throw ConfigError(msg); }

// strict-schema walk: every key in `user` must exist in `schema`; objects
// recurse. Variant objects (profiles, velocity, inclusion) are checked
// against the union of their fields.
void check_keys(const json& user, const json& schema, const std::string& path) {
    if (!user.is_object()) return;
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string sub = path.empty() ? it.key() : path + "." + it.key();
        if (!schema.is_object() || !schema.contains(it.key()))
            fail("unknown config key '" + sub + "'");
        check_keys(it.value(), schema.at(it.key()), sub);
    }
}

double num(const json& j, const std::string& path) {
    if (!j.is_number()) fail("config field '" + path + "' must be a number");
    return j.get<double>();
}

Vec2 vec2(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2)
        fail("config field '" + path + "' must be an [x, y] pair");
    return Vec2(num(j[0], path), num(j[1], path));
}

ProfileSpec parse_profile(const json& j, const std::string& path) {
    ProfileSpec p;
    const std::string type = j.value("type", "constant");
    if (type == "constant") {
        p.kind = ProfileSpec::Kind::constant;
        if (j.contains("value")) p.value = num(j["value"], path + ".value");
    } else if (type == "gaussian") {
        p.kind = ProfileSpec::Kind::gaussian;
        if (j.contains("center")) p.center = vec2(j["center"], path + ".center");
        if (j.contains("width")) p.width = num(j["width"], path + ".width");
        if (j.contains("amplitude"))
            p.amplitude = num(j["amplitude"], path + ".amplitude");
        if (j.contains("floor")) p.floor = num(j["floor"], path + ".floor");
        if (!(p.width > 0.0)) fail(path + ".width must be > 0");
    } else {
        fail(path + ".type must be 'constant' or 'gaussian'");
    }
    return p;
}

// union schema for the strict key check, covering all variant fields
json schema_json() {
    RunConfig d;
    json s = config_json(d);
    s["geometry"]["inclusion"] = {{"type", ""},
                                  {"center", json::array()},
                                  {"radius", 0.0},
                                  {"axis", 0},
                                  {"fraction", 0.0}};
    s["velocity"] = {{"type", ""},
                     {"mean", json::array()},
                     {"amplitude", 0.0},
                     {"file", ""}};
    const json profile = {{"type", ""},        {"value", 0.0},
                          {"center", json::array()}, {"width", 0.0},
                          {"amplitude", 0.0},  {"floor", 0.0}};
    s["macro"]["T_init"] = profile;
    s["macro"]["C_init"] = profile;
    return s;
}

void set_num(const json& j, const char* key, double& out,
             const std::string& path) {
    if (j.contains(key)) out = num(j[key], path + "." + key);
}

void set_int(const json& j, const char* key, int& out,
             const std::string& path) {
    if (!j.contains(key)) return;
    if (!j[key].is_number_integer())
        fail("config field '" + path + "." + key + "' must be an integer");
    out = j[key].get<int>();
}

}  // namespace

RunConfig parse_config_text(const std::string& text,
                            const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin + ": " + e.what());
    }
    if (!j.is_object()) fail(origin + ": top level must be a JSON object");
    check_keys(j, schema_json(), "");

    RunConfig c;
    if (j.contains("geometry")) {
        const json& g = j["geometry"];
        set_num(g, "h", c.h, "geometry");
        if (g.contains("inclusion")) {
            const json& inc = g["inclusion"];
            const std::string type = inc.value("type", "none");
            if (type == "none") {
                c.geometry = make_empty_cell();
            } else if (type == "disk") {
                Vec2 center{0.5, 0.5};
                double radius = 0.25;
                if (inc.contains("center"))
                    center = vec2(inc["center"], "geometry.inclusion.center");
                set_num(inc, "radius", radius, "geometry.inclusion");
                c.geometry = make_disk_cell(center, radius);
            } else if (type == "stripe") {
                int axis = 0;
                double fraction = 0.5;
                set_int(inc, "axis", axis, "geometry.inclusion");
                set_num(inc, "fraction", fraction, "geometry.inclusion");
                c.geometry = make_stripe_cell(axis, fraction);
            } else {
                fail("geometry.inclusion.type must be none, disk or stripe");
            }
        }
    }
    if (!(c.h > 0.0 && c.h < 0.5)) fail("geometry.h must lie in (0, 0.5)");

    if (j.contains("materials")) {
        const json& m = j["materials"];
        set_num(m, "c_g", c.materials.c_g, "materials");
        set_num(m, "c_s", c.materials.c_s, "materials");
        set_num(m, "lambda_g", c.materials.lambda_g, "materials");
        set_num(m, "lambda_s", c.materials.lambda_s, "materials");
        set_num(m, "D", c.materials.D, "materials");
    }
    try {
        validate_materials(c.materials);
    } catch (const ConfigError& e) {
        fail(std::string("materials: ") + e.what());
    }

    if (j.contains("kinetics")) {
        const json& k = j["kinetics"];
        set_num(k, "A", c.kinetics.A, "kinetics");
        set_num(k, "T_a", c.kinetics.T_a, "kinetics");
        set_num(k, "Q", c.kinetics.Q, "kinetics");
    }
    try {
        validate_kinetics(c.kinetics);
    } catch (const ConfigError& e) {
        fail(std::string("kinetics: ") + e.what());
    }

    if (j.contains("velocity")) {
        const json& v = j["velocity"];
        const std::string type = v.value("type", "constant");
        if (type == "constant") {
            c.velocity.kind = VelocityRecipe::Kind::constant;
            if (v.contains("mean"))
                c.velocity.mean = vec2(v["mean"], "velocity.mean");
        } else if (type == "cellular") {
            c.velocity.kind = VelocityRecipe::Kind::cellular;
            set_num(v, "amplitude", c.velocity.amplitude, "velocity");
        } else if (type == "custom") {
            c.velocity.kind = VelocityRecipe::Kind::custom;
            if (!v.contains("file") || !v["file"].is_string())
                fail("velocity.file is required for a custom recipe");
            c.velocity.file = v["file"].get<std::string>();
        } else {
            fail("velocity.type must be constant, cellular or custom");
        }
    }

    if (j.contains("scales")) {
        const json& s = j["scales"];
        set_num(s, "L", c.scales.L, "scales");
        set_num(s, "b_c", c.scales.b_c, "scales");
        set_num(s, "D_c", c.scales.D_c, "scales");
        set_num(s, "lambda_gc", c.scales.lambda_gc, "scales");
        set_num(s, "c_gc", c.scales.c_gc, "scales");
        set_num(s, "c_sc", c.scales.c_sc, "scales");
        set_num(s, "lambda_sc", c.scales.lambda_sc, "scales");
        set_num(s, "A_c", c.scales.A_c, "scales");
        set_num(s, "Q_c", c.scales.Q_c, "scales");
        set_num(s, "C_c", c.scales.C_c, "scales");
        set_num(s, "epsilon", c.scales.epsilon, "scales");
        validate_scales(c.scales);
    }

    if (j.contains("cell")) {
        set_num(j["cell"], "T0", c.cell_T0, "cell");
        set_num(j["cell"], "C0", c.cell_C0, "cell");
        if (!(c.cell_T0 > 0.0)) fail("cell.T0 must be > 0");
        if (c.cell_C0 < 0.0) fail("cell.C0 must be >= 0");
    }

    if (j.contains("table")) {
        const json& t = j["table"];
        set_num(t, "T0_min", c.table.T0_min, "table");
        set_num(t, "T0_max", c.table.T0_max, "table");
        set_int(t, "T0_points", c.table.T0_points, "table");
        set_num(t, "C0_min", c.table.C0_min, "table");
        set_num(t, "C0_max", c.table.C0_max, "table");
        set_int(t, "C0_points", c.table.C0_points, "table");
    }

    if (j.contains("macro")) {
        const json& m = j["macro"];
        set_int(m, "N", c.macro.N, "macro");
        set_num(m, "box", c.macro.box, "macro");
        set_num(m, "dt", c.macro.dt, "macro");
        set_num(m, "T_f", c.macro.T_f, "macro");
        if (m.contains("snapshot_times")) {
            if (!m["snapshot_times"].is_array())
                fail("macro.snapshot_times must be an array");
            c.macro.snapshot_times.clear();
            for (const auto& t : m["snapshot_times"])
                c.macro.snapshot_times.push_back(
                    num(t, "macro.snapshot_times"));
        }
        if (m.contains("frames")) {
            const std::string f = m["frames"].get<std::string>();
            if (f == "identified")
                c.macro.frames_identified = true;
            else if (f == "offset")
                c.macro.frames_identified = false;
            else
                fail("macro.frames must be 'identified' or 'offset'");
        }
        if (m.contains("T_init"))
            c.macro.T_init = parse_profile(m["T_init"], "macro.T_init");
        if (m.contains("C_init"))
            c.macro.C_init = parse_profile(m["C_init"], "macro.C_init");
        if (c.macro.N < 2) fail("macro.N must be >= 2");
        if (!(c.macro.dt > 0.0)) fail("macro.dt must be > 0");
        if (c.macro.T_f < 0.0) fail("macro.T_f must be >= 0");
        if (!(c.macro.box > 0.0)) fail("macro.box must be > 0");
    }
    // initial data must respect positivity: T bounded away from 0, C >= 0
    if (c.macro.T_init.kind == ProfileSpec::Kind::constant
            ? !(c.macro.T_init.value > 0.0)
            : !(c.macro.T_init.floor > 0.0 &&
                c.macro.T_init.floor + c.macro.T_init.amplitude > 0.0))
        fail("macro.T_init must be strictly positive (hypothesis (H3))");
    if (c.macro.C_init.kind == ProfileSpec::Kind::constant
            ? c.macro.C_init.value < 0.0
            : (c.macro.C_init.floor < 0.0 ||
               c.macro.C_init.floor + c.macro.C_init.amplitude < 0.0))
        fail("macro.C_init must be non-negative (hypothesis (H3))");

    if (j.contains("micro")) {
        const json& m = j["micro"];
        if (m.contains("eps_denominators")) {
            if (!m["eps_denominators"].is_array())
                fail("micro.eps_denominators must be an array of integers");
            c.micro.eps_denominators.clear();
            for (const auto& e : m["eps_denominators"]) {
                if (!e.is_number_integer() || e.get<int>() < 2)
                    fail("micro.eps_denominators entries must be integers >= 2");
                c.micro.eps_denominators.push_back(e.get<int>());
            }
        }
        set_num(m, "dt", c.micro.dt, "micro");
        if (!(c.micro.dt > 0.0)) fail("micro.dt must be > 0");
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string effective_config_json(const RunConfig& cfg) {
    return config_json(cfg).dump(2) + "\n";
}

VelocityField make_velocity(const VelocityRecipe& recipe,
                            const PeriodicMesh& mesh) {
    switch (recipe.kind) {
        case VelocityRecipe::Kind::constant:
            return make_constant_velocity(mesh, recipe.mean);
        case VelocityRecipe::Kind::cellular:
            return make_cellular_velocity(mesh, recipe.amplitude);
        case VelocityRecipe::Kind::custom: {
            std::ifstream in(recipe.file);
            if (!in)
                fail("cannot open velocity file '" + recipe.file + "'");
            json j;
            try {
                in >> j;
            } catch (const json::parse_error& e) {
                fail(recipe.file + ": " + e.what());
            }
            if (!j.contains("nodal") || !j["nodal"].is_array() ||
                j["nodal"].size() != static_cast<size_t>(mesh.num_vertices()))
                fail(recipe.file +
                     ": 'nodal' must list one [bx, by] pair per mesh vertex");
            std::vector<Vec2> raw(mesh.num_vertices());
            for (int v = 0; v < mesh.num_vertices(); ++v)
                raw[v] = vec2(j["nodal"][v], "nodal");
            return project_divergence_free(mesh, raw);
        }
    }
    fail("unresolvable velocity recipe");
}

}  // namespace homogfc
