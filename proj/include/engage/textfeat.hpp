#pragma once

#include "engage/corpus.hpp"
#include "engage/topics.hpp"

#include <array>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

// Word -> value table with a declared value range. Keys are stored lowercase.
class LexiconTable {
public:
    LexiconTable(std::string name, double lo, double hi);

    // Throws DataError if `value` is outside the declared range.
    void add(std::string_view word, double value);

    std::optional<double> lookup(std::string_view lowered_word) const;
    const std::string& name() const { return name_; }
    double min_value() const { return lo_; }
    double max_value() const { return hi_; }
    std::size_t size() const { return entries_.size(); }
    const std::map<std::string, double, std::less<>>& entries() const { return entries_; }

private:
    std::string name_;
    double lo_;
    double hi_;
    std::map<std::string, double, std::less<>> entries_;
};

/// "word<TAB>value" lines; '#'-prefixed lines and blank lines are skipped.
LexiconTable load_lexicon(std::istream& in, std::string name, double lo, double hi);
LexiconTable load_lexicon_file(const std::string& path, std::string name, double lo, double hi);

using WordSet = std::set<std::string, std::less<>>;

/// One word per line, same comment rule as lexicon files.
WordSet load_word_list(std::istream& in);
WordSet load_word_list_file(const std::string& path);

struct Lexicons {
    LexiconTable valence{"valence", -4.0, 4.0};
    LexiconTable subjectivity{"subjectivity", 0.0, 1.0};
    LexiconTable concreteness{"concreteness", 1.0, 5.0};
    WordSet easy_words;
};

struct SentimentConfig {
    double normalization_alpha = 15.0;
    double booster_increment = 0.293;
    double negation_factor = -0.74;
    int negation_window = 3;

    void validate() const;
};

bool is_emoticon(std::string_view token);

/// Lowercased runs of letters, digits and apostrophes (outer apostrophes
/// trimmed), interleaved with emoticons from a fixed list. Bytes >= 0x80 are
/// word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Splits on runs of '.', '!' and '?'. Fragments are trimmed; empty ones are
/// dropped.
std::vector<std::string> split_sentences(std::string_view text);

/// Dale-Chall score. Emoticons are not words for either the difficult-word
/// percentage or the sentence-length term.
double readability(std::string_view text, const WordSet& easy_words);

/// Mean rating of tokens found in the lexicon; nullopt when none match.
std::optional<double> concreteness(std::span<const std::string> tokens, const LexiconTable& lexicon);

std::size_t text_length(std::string_view cleaned_text);

/// Lexicon valence with booster and negation rules, squashed to [-1, 1] by
/// x / sqrt(x^2 + alpha).
double sentiment(std::string_view text, const LexiconTable& valence, const SentimentConfig& cfg = {});
double sentiment_tokens(std::span<const std::string> tokens, const LexiconTable& valence,
                        const SentimentConfig& cfg = {});

double subjectivity(std::span<const std::string> tokens, const LexiconTable& lexicon);

struct ComplexityFeatures {
    double readability = 0.0;
    std::optional<double> concreteness;
    std::size_t length = 0;
    bool has_link = false;

    bool operator==(const ComplexityFeatures&) const = default;
};

struct ValenceFeatures {
    double sentiment = 0.0;
    double subjectivity = 0.0;

    bool operator==(const ValenceFeatures&) const = default;
};

struct FeatureVector {
    std::string id;
    ComplexityFeatures complexity;
    ValenceFeatures valence;
    TopicSet topics;
    double log_followers = 0.0;
    double log_listed = 0.0;
    bool verified = false;

    bool concreteness_missing() const { return !complexity.concreteness.has_value(); }
    bool operator==(const FeatureVector&) const = default;
};

FeatureVector featurize(const TweetRecord& record, const Lexicons& lexicons, const TopicSet& topics,
                        const SentimentConfig& cfg = {});

// Column order of features.csv.
const std::vector<std::string>& feature_csv_header();
void write_features_csv(std::ostream& out, std::span<const FeatureVector> features);
std::vector<FeatureVector> read_features_csv(std::istream& in);

}  // namespace engage
