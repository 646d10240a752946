#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "homogfc/config.hpp"

namespace homogfc {

/// One pipeline stage execution: either freshly computed or reused from the
/// artifact directory when the input hash matches the stored manifest.
struct StageResult {
    std::string name;
    bool cached = false;
    std::string hash;  // hex digest of the stage inputs
    std::vector<std::string> outputs;
};

struct PipelineResult {
    std::vector<StageResult> stages;
};

/// Runs the requested stages (empty list = all) in dependency order:
/// scaling -> drifts -> cell -> tensors -> macro -> validate. Each stage
/// writes its artifacts under `out_dir` plus a manifest entry with the
/// input hash; a rerun with unchanged inputs reuses the artifacts.
PipelineResult run_pipeline(const RunConfig& cfg, const std::string& out_dir,
                            const std::vector<std::string>& stages = {});

/// Derives tidy plot-ready CSV series from an artifact directory.
/// Missing artifacts raise ConfigError naming the stage that produces them.
void emit_plot_data(const std::string& artifact_dir);

/// FNV-1a 64-bit content hash used by the manifest.
std::uint64_t fnv1a(const std::string& data);

/// Writes via a temp file + rename so readers never observe partial content.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace homogfc
