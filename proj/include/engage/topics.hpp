#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

// Eleven annotated categories plus the Other catch-all. The order here fixes
// column order everywhere topics appear (feature files, design matrices).
enum class Topic : std::size_t {
    Technology,
    Sports,
    Games,
    Idioms,
    MoviesTV,
    Politics,
    Music,
    Celebrity,
    Art,
    Business,
    News,
    Other,
};

inline constexpr std::size_t kTopicCount = 12;

std::string_view topic_label(Topic t);
std::optional<Topic> parse_topic_label(std::string_view label);
const std::array<Topic, kTopicCount>& all_topics();

class TopicSet {
public:
    TopicSet() = default;

    void set(Topic t) { flags_.set(static_cast<std::size_t>(t)); }
    bool has(Topic t) const { return flags_.test(static_cast<std::size_t>(t)); }
    bool empty() const { return flags_.none(); }
    std::size_t count() const { return flags_.count(); }
    std::vector<Topic> topics() const;

    TopicSet& operator|=(const TopicSet& other)
    {
        flags_ |= other.flags_;
        return *this;
    }
    bool operator==(const TopicSet&) const = default;

private:
    std::bitset<kTopicCount> flags_;
};

// hashtag (lowercase, no '#') -> non-empty label set
class TopicLexicon {
public:
    void add(std::string hashtag, Topic topic);

    bool contains(std::string_view hashtag) const;
    const TopicSet* find(std::string_view hashtag) const;
    std::size_t size() const { return mapping_.size(); }
    const std::map<std::string, TopicSet, std::less<>>& mapping() const { return mapping_; }

    // Hashtags annotated with `topic`, in lexicographic order.
    std::vector<std::string> hashtags_for(Topic topic) const;

private:
    std::map<std::string, TopicSet, std::less<>> mapping_;
};

/// Reads "hashtag,topic" rows (header optional). Several rows for the same
/// hashtag build a multi-label entry. Throws DataError on an unknown label
/// (naming the line) or when no rows are present.
TopicLexicon load_topic_lexicon(std::istream& in);
TopicLexicon load_topic_lexicon_file(const std::string& path);

/// Union of the label sets of every known hashtag; Other alone when nothing
/// matches.
TopicSet tag(std::span<const std::string> hashtags, const TopicLexicon& lexicon);

}  // namespace engage
