#pragma once

#include <string>
#include <vector>

#include "homogfc/kinetics.hpp"
#include "homogfc/micro.hpp"

namespace homogfc {

/// How to obtain the gas velocity on the cell mesh.
struct VelocityRecipe {
    enum class Kind { constant, cellular, custom } kind = Kind::constant;
    Vec2 mean{0.0, 0.0};     // constant
    double amplitude = 1.0;  // cellular
    std::string file;        // custom: JSON with per-vertex samples
};

struct MacroConfig {
    int N = 64;
    double box = 1.0;
    double dt = 5e-4;
    double T_f = 0.05;
    std::vector<double> snapshot_times;  // empty = final state only
    bool frames_identified = true;
    ProfileSpec T_init, C_init;
};

struct MicroSweepConfig {
    std::vector<int> eps_denominators{4, 8, 16};  // epsilon = 1/n
    double dt = 2.5e-4;
};

struct RunConfig {
    CellGeometry geometry;
    double h = 0.05;
    MaterialParams materials;
    KineticsParams kinetics;
    VelocityRecipe velocity;
    CharacteristicScales scales;
    double cell_T0 = 1.0, cell_C0 = 0.5;  // state for single-point solves
    TableGrid table;
    MacroConfig macro;
    MicroSweepConfig micro;
};

/// Parses and validates a JSON config file. The schema is strict: unknown
/// keys are an error, missing keys take defaults. Validation failures name
/// the offending field and the violated hypothesis.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin);

/// The fully-defaulted configuration, serialized deterministically (sorted
/// keys, shortest round-trip floats); written beside outputs so a run is
/// reproducible from its artifacts alone.
std::string effective_config_json(const RunConfig& cfg);

/// Resolves the velocity recipe on a concrete cell mesh.
VelocityField make_velocity(const VelocityRecipe& recipe,
                            const PeriodicMesh& mesh);

}  // namespace homogfc
