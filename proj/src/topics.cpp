#include "engage/topics.hpp"

#include "engage/error.hpp"
#include "engage/text_util.hpp"

#include <fstream>

namespace engage {

namespace {

constexpr std::array<std::string_view, kTopicCount> kLabels = {
    "Technology", "Sports", "Games",     "Idioms",   "Movies/TV", "Politics",
    "Music",      "Celebrity", "Art",    "Business", "News",      "Other",
};

}  // namespace

std::string_view topic_label(Topic t)
{
    return kLabels[static_cast<std::size_t>(t)];
}

std::optional<Topic> parse_topic_label(std::string_view label)
{
    for (std::size_t i = 0; i < kLabels.size(); ++i) {
        if (kLabels[i] == label) return static_cast<Topic>(i);
    }
    return std::nullopt;
}

const std::array<Topic, kTopicCount>& all_topics()
{
    static const std::array<Topic, kTopicCount> topics = [] {
        std::array<Topic, kTopicCount> out{};
        for (std::size_t i = 0; i < kTopicCount; ++i) out[i] = static_cast<Topic>(i);
        return out;
    }();
    return topics;
}

std::vector<Topic> TopicSet::topics() const
{
    std::vector<Topic> out;
    for (auto t : all_topics()) {
        if (has(t)) out.push_back(t);
    }
    return out;
}

void TopicLexicon::add(std::string hashtag, Topic topic)
{
    mapping_[to_lower_ascii(hashtag)].set(topic);
}

bool TopicLexicon::contains(std::string_view hashtag) const
{
    return mapping_.find(hashtag) != mapping_.end();
}

const TopicSet* TopicLexicon::find(std::string_view hashtag) const
{
    auto it = mapping_.find(hashtag);
    return it == mapping_.end() ? nullptr : &it->second;
}

std::vector<std::string> TopicLexicon::hashtags_for(Topic topic) const
{
    std::vector<std::string> out;
    for (const auto& [tag, set] : mapping_) {
        if (set.has(topic)) out.push_back(tag);
    }
    return out;
}

TopicLexicon load_topic_lexicon(std::istream& in)
{
    TopicLexicon lexicon;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto row = trim(line);
        if (row.empty()) continue;
        if (line_no == 1 && to_lower_ascii(row) == "hashtag,topic") continue;

        auto comma = row.find(',');
        if (comma == std::string_view::npos) {
            throw DataError("topic lexicon line " + std::to_string(line_no) + ": expected 'hashtag,topic'");
        }
        auto hashtag = trim(row.substr(0, comma));
        auto label = trim(row.substr(comma + 1));
        if (!hashtag.empty() && hashtag.front() == '#') hashtag.remove_prefix(1);
        if (hashtag.empty()) {
            throw DataError("topic lexicon line " + std::to_string(line_no) + ": empty hashtag");
        }
        auto topic = parse_topic_label(label);
        if (!topic) {
            throw DataError("topic lexicon line " + std::to_string(line_no) + ": unknown topic label '" +
                            std::string(label) + "'");
        }
        lexicon.add(std::string(hashtag), *topic);
    }
    if (lexicon.size() == 0) throw DataError("topic lexicon is empty");
    return lexicon;
}

TopicLexicon load_topic_lexicon_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open topic lexicon: " + path);
    return load_topic_lexicon(in);
}

TopicSet tag(std::span<const std::string> hashtags, const TopicLexicon& lexicon)
{
    TopicSet out;
    for (const auto& h : hashtags) {
        if (const auto* set = lexicon.find(h)) out |= *set;
    }
    if (out.empty()) out.set(Topic::Other);
    return out;
}

}  // namespace engage
