/// @file runner.hpp
/// @brief Scenario orchestration, CSV/JSON outputs and run manifests.

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tcs/config.hpp"

namespace tcs {

struct FileEntry {
    std::string name;  // relative to the run directory
    std::size_t rows = 0;
};

struct RunManifest {
    std::string config_hash;  // hex FNV-1a of the canonical config
    std::string scenario;
    std::string version;
    std::string config_text;
    double wall_seconds = 0.0;
    bool complete = false;
    std::string error;
    int exit_code = 0;
    std::vector<FileEntry> files;
    std::vector<std::string> warnings;
};

/// TCS_OUTPUT_ROOT if set, else "output".
std::filesystem::path output_root();

/// Run directory: the configured output (relative paths under output_root()), or
/// output_root()/<scenario>-<hash>.
std::filesystem::path run_directory(const ExperimentConfig& c);

/// Executes the scenario, writing outputs and manifest.json into run_directory(c).
/// The manifest is written before the run (incomplete) and rewritten afterwards.
/// Solver errors are recorded in the manifest and rethrown.
RunManifest run(const ExperimentConfig& c, std::ostream& log);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

struct CheckReport {
    std::vector<std::string> passed;
    std::vector<std::string> failed;
    bool ok() const noexcept { return failed.empty(); }
};

/// Re-reads the outputs listed in a manifest and re-verifies row counts and the
/// invariants that can be checked from the stored series.
CheckReport check_manifest(const std::filesystem::path& manifest_path);

std::string version_string();

}  // namespace tcs
