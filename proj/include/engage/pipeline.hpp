#pragma once

#include "engage/config.hpp"
#include "engage/manifest.hpp"

#include <filesystem>
#include <string_view>
#include <vector>

namespace engage {

// Stage names in run order.
inline constexpr std::array<std::string_view, 6> kStages = {"ingest", "featurize", "score", "analyze", "cv", "report"};

/// Runs one stage against the artifacts already in `out_dir`, then refreshes
/// manifest.json. A missing upstream artifact throws DataError naming it.
RunManifest run_stage(std::string_view stage, const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Every stage in order.
RunManifest run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_dir);

/// Generates cfg.synth (with comment_noise_scale applied) and writes the
/// records to `path` in the corpus line format.
std::size_t write_synthetic_corpus(const RunConfig& cfg, const std::filesystem::path& path);

}  // namespace engage
