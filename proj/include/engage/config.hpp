#pragma once

#include "engage/synth.hpp"
#include "engage/unexpect.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace engage {

struct LexiconPaths {
    std::filesystem::path topics;
    std::filesystem::path valence;
    std::filesystem::path subjectivity;
    std::filesystem::path concreteness;
    std::filesystem::path easy_words;
};

struct RunConfig {
    std::filesystem::path input;  // line-delimited corpus; may be empty for synth-only use
    LexiconPaths lexicons;
    PipelineConfig pipeline;
    SynthConfig synth;
    double comment_noise_scale = 1.0;  // multiplies synth.type_noise[comments]

    void validate() const;
};

/// Directory holding the shipped lexicons (set at build time).
std::filesystem::path default_data_dir();

/// Defaults with lexicon paths pointing at the shipped data directory.
RunConfig default_run_config();

/// Parses a JSON config. Relative paths resolve against `base_dir`. Unknown
/// keys and ill-typed or out-of-range values throw ConfigError naming the key.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Effective configuration as JSON (object keys sorted), as echoed into the
/// manifest and hashed.
nlohmann::json to_json(const RunConfig& cfg);

/// "feature:target:effect", e.g. "has_link:retweets:0.4".
PlantedEffect parse_planted_effect(std::string_view spec);

Lexicons load_lexicons(const LexiconPaths& paths);

}  // namespace engage
