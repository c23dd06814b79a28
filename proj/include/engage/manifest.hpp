#pragma once

#include "json.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);  // throws DataError if unreadable

/// SHA-256 of the compact dump; nlohmann objects keep keys sorted, so the
/// hash ignores the key order of the source file.
std::string config_hash(const nlohmann::json& config);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunManifest {
    std::string version;
    std::string config_hash;
    nlohmann::json config;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
    std::vector<StageTiming> timings;
    std::vector<std::string> outputs;  // names relative to the output directory

    void add_input(const std::filesystem::path& path);
    void add_output(const std::string& name);
    void add_timing(std::string stage, double seconds);

    /// Output digests are computed from the files under `out_dir`.
    nlohmann::json to_json(const std::filesystem::path& out_dir) const;
    static RunManifest from_json(const nlohmann::json& j);
};

inline constexpr std::string_view kManifestName = "manifest.json";

/// Existing manifest in `out_dir` when its config hash matches, else a fresh one.
RunManifest open_manifest(const std::filesystem::path& out_dir, const nlohmann::json& config);
void write_manifest(const std::filesystem::path& out_dir, const RunManifest& m);

std::string tool_version();

}  // namespace engage
