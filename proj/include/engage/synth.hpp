#pragma once

#include "engage/corpus.hpp"
#include "engage/textfeat.hpp"
#include "engage/topics.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace engage {

enum class EngagementType : std::size_t { Likes = 0, Retweets = 1, Comments = 2 };

inline constexpr std::array<EngagementType, 3> kEngagementTypes = {
    EngagementType::Likes, EngagementType::Retweets, EngagementType::Comments};

std::string_view engagement_name(EngagementType t);  // "likes", "retweets", "comments"
EngagementType parse_engagement(std::string_view name);
std::int64_t count_of(const EngagementCounts& c, EngagementType t);

// Adds `effect` log-units to the target's log-count, scaled by the record's
// extracted value of `feature` (0/1 for flags, the raw value for continuous
// features such as sentiment).
struct PlantedEffect {
    std::string feature;
    EngagementType target = EngagementType::Likes;
    double effect = 0.0;
};

/// Feature value used by planted effects. Known names: has_link, verified,
/// readability, concreteness (0 when missing), length, sentiment,
/// subjectivity, log_followers, log_listed, and topic labels.
double planted_feature_value(const FeatureVector& f, std::string_view feature);

struct SynthConfig {
    std::size_t n = 1000;
    double popularity_sigma = 1.0;
    std::array<double, 3> base_log = {3.0, 1.8, 1.6};
    // Defaults are the calibrate_correlations() solution for the default
    // targets with the fields above.
    std::array<double, 3> type_loadings = {0.9830228551557233, 0.99121807670889739, 0.87977580645995135};
    std::array<double, 3> type_noise = {0.18348314974811672, 0.1322373790027406, 0.47538882019641793};
    std::vector<PlantedEffect> planted_effects;
    std::array<double, 3> target_correlations = {0.96, 0.80, 0.81};  // likes-retweets, likes-comments, retweets-comments
    double link_rate = 0.77;
    double verified_rate = 0.17;
    double multi_topic_rate = 0.15;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

/// Seeded corpus whose text carries the features the counts were planted on.
/// Record i draws from substreams keyed by (seed, i), so output is independent
/// of generation order.
std::vector<TweetRecord> generate(const SynthConfig& cfg, const Lexicons& lexicons, const TopicLexicon& topics);

/// Counts only (no text); same count streams as generate() when there are no
/// planted effects.
std::vector<EngagementCounts> generate_counts(const SynthConfig& cfg);

/// Pairwise Pearson correlations: likes-retweets, likes-comments,
/// retweets-comments.
std::array<double, 3> count_correlations(const std::vector<EngagementCounts>& counts);

struct Calibration {
    std::array<double, 3> type_loadings{};
    std::array<double, 3> type_noise{};
    std::array<double, 3> achieved{};  // Monte-Carlo correlations at the returned parameters
    int iterations = 0;
    bool within_tol = false;
};

/// Chooses loadings and noise so raw-count correlations hit `targets`
/// (likes-retweets, likes-comments, retweets-comments). Log-variance per type
/// is held at popularity_sigma^2, the lognormal correlation identity gives a
/// starting point, and Monte-Carlo estimates at `mc_n` records correct it.
/// Throws ConfigError when a one-factor structure cannot produce the targets.
Calibration calibrate_correlations(const SynthConfig& base, std::array<double, 3> targets, double tol,
                                   std::size_t mc_n = 100'000, std::uint64_t mc_seed = 12345);

}  // namespace engage
