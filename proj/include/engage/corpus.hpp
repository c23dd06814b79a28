#pragma once

#include "engage/topics.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace engage {

struct EngagementCounts {
    std::int64_t likes = 0;
    std::int64_t retweets = 0;
    std::int64_t comments = 0;

    std::int64_t max() const;
    bool operator==(const EngagementCounts&) const = default;
};

struct AuthorAttributes {
    std::int64_t followers = 0;
    std::int64_t listed = 0;
    bool verified = false;

    bool operator==(const AuthorAttributes&) const = default;
};

struct TweetRecord {
    std::string id;
    std::string text;                   // verbatim
    std::vector<std::string> hashtags;  // lowercase, no '#'
    std::vector<std::string> urls;
    AuthorAttributes author;
    EngagementCounts counts;

    bool operator==(const TweetRecord&) const = default;
};

struct Entities {
    std::vector<std::string> hashtags;
    std::vector<std::string> urls;
    std::string cleaned_text;
};

/// Pulls '#'[A-Za-z0-9_]+ hashtags and http(s):// URLs out of `text`, and
/// returns the remainder with whitespace runs collapsed and ends trimmed.
Entities extract_entities(std::string_view text);

struct RecordError {
    std::size_t line = 0;
    std::string message;
};

struct ParseResult {
    std::vector<TweetRecord> records;
    std::vector<RecordError> errors;
};

/// One JSON object per line. Malformed lines are collected in `errors` and
/// skipped; a repeated id throws DataError naming the id.
ParseResult parse_records(std::istream& in);

void write_record(std::ostream& out, const TweetRecord& record);
void write_records(std::ostream& out, const std::vector<TweetRecord>& records);

struct FilterConfig {
    bool require_text = true;
    std::int64_t min_each_engagement = 1;
    std::int64_t min_any_engagement = 0;
    bool require_lexicon_hashtag = true;
    // Language heuristic; 0 disables it.
    double min_ascii_ratio = 0.0;

    void validate() const;
};

// Exclusion reasons, in the order they are checked.
inline constexpr std::array<std::string_view, 5> kExclusionReasons = {
    "require_text", "min_each_engagement", "min_any_engagement", "require_lexicon_hashtag", "min_ascii_ratio",
};

struct CorpusSnapshot {
    std::vector<TweetRecord> records;  // sorted by id
    FilterConfig filter;
    std::vector<std::pair<std::string, std::size_t>> exclusions;  // kExclusionReasons order

    std::size_t excluded_total() const;
};

/// `lexicon` may be null only when cfg.require_lexicon_hashtag is false.
CorpusSnapshot apply_filters(std::vector<TweetRecord> records, const FilterConfig& cfg,
                             const TopicLexicon* lexicon);

struct CountDistribution {
    std::int64_t min = 0;
    std::int64_t max = 0;
    double mean = 0.0;
    double median = 0.0;
    double p90 = 0.0;
};

struct CorpusStats {
    std::size_t records = 0;
    std::array<CountDistribution, 3> distributions;  // likes, retweets, comments
    double corr_likes_retweets = 0.0;
    double corr_likes_comments = 0.0;
    double corr_retweets_comments = 0.0;
    std::size_t with_link = 0;
    std::size_t without_link = 0;
    std::size_t verified = 0;
    std::size_t unverified = 0;
};

double pearson(std::span<const double> a, std::span<const double> b);

/// Throws NumericalError for fewer than two records or a constant count
/// column (correlation undefined).
CorpusStats summarize(const CorpusSnapshot& corpus);

void write_summary(std::ostream& out, const CorpusStats& stats);
void write_exclusions_csv(std::ostream& out, const CorpusSnapshot& corpus);

}  // namespace engage
