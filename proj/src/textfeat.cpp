#include "engage/textfeat.hpp"

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/text_util.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>

namespace engage {

namespace {

// Longest forms first so ":-)" wins over ":)"-style prefixes.
constexpr std::array<std::string_view, 18> kEmoticons = {
    ":-)", ":-(", ":-D", ";-)", ":-P", ":')", ":'(", ":)", ":(", ":D",
    ";)",  ":P",  ":p",  ":/",  ":|",  "=)",  "<3",  ":O",
};

const WordSet& negators()
{
    static const WordSet words = {
        "aint",    "arent",    "cannot", "cant",   "couldnt", "didnt",  "doesnt", "dont",  "hadnt",
        "hasnt",   "havent",   "isnt",   "mightnt", "mustnt", "neednt", "neither", "never", "no",
        "nobody",  "none",     "nope",   "nor",    "not",     "nothing", "nowhere", "rarely", "seldom",
        "shouldnt", "wasnt",   "werent", "without", "wont",   "wouldnt",
    };
    return words;
}

// +1 intensifies, -1 dampens.
const std::map<std::string, int, std::less<>>& boosters()
{
    static const std::map<std::string, int, std::less<>> words = {
        {"absolutely", 1}, {"amazingly", 1},    {"awfully", 1},    {"completely", 1}, {"deeply", 1},
        {"enormously", 1}, {"entirely", 1},     {"especially", 1}, {"extremely", 1},  {"fully", 1},
        {"greatly", 1},    {"highly", 1},       {"hugely", 1},     {"incredibly", 1}, {"intensely", 1},
        {"more", 1},       {"most", 1},         {"particularly", 1}, {"quite", 1},    {"really", 1},
        {"remarkably", 1}, {"so", 1},           {"super", 1},      {"thoroughly", 1}, {"totally", 1},
        {"tremendously", 1}, {"unbelievably", 1}, {"utterly", 1},  {"very", 1},
        {"almost", -1},    {"barely", -1},      {"hardly", -1},    {"kinda", -1},     {"less", -1},
        {"marginally", -1}, {"occasionally", -1}, {"partly", -1},  {"scarcely", -1},  {"slightly", -1},
        {"somewhat", -1},  {"sorta", -1},
    };
    return words;
}

bool is_negator(std::string_view token)
{
    if (negators().count(token) != 0) return true;
    return token.find("n't") != std::string_view::npos;
}

bool is_token_char(unsigned char c)
{
    return std::isalnum(c) != 0 || c == '\'' || c >= 0x80;
}

bool is_alnum_byte(unsigned char c)
{
    return std::isalnum(c) != 0 || c >= 0x80;
}

std::size_t match_emoticon(std::string_view text, std::size_t i)
{
    if (i > 0 && is_alnum_byte(static_cast<unsigned char>(text[i - 1]))) return 0;
    for (auto e : kEmoticons) {
        if (text.substr(i).starts_with(e)) {
            std::size_t end = i + e.size();
            if (end < text.size() && is_alnum_byte(static_cast<unsigned char>(text[end]))) continue;
            return e.size();
        }
    }
    return 0;
}

bool is_sentence_end(char c)
{
    return c == '.' || c == '!' || c == '?';
}

std::string strip_comment_line(const std::string& line, bool& skip)
{
    auto t = trim(line);
    skip = t.empty() || t.front() == '#';
    return std::string(t);
}

}  // namespace

LexiconTable::LexiconTable(std::string name, double lo, double hi) : name_(std::move(name)), lo_(lo), hi_(hi)
{
    if (!(lo <= hi)) throw ConfigError("lexicon '" + name_ + "' has an empty value range");
}

void LexiconTable::add(std::string_view word, double value)
{
    if (!(value >= lo_ && value <= hi_)) {
        throw DataError("lexicon '" + name_ + "': value " + format_double(value) + " for '" + std::string(word) +
                        "' outside [" + format_double(lo_) + ", " + format_double(hi_) + "]");
    }
    entries_[to_lower_ascii(word)] = value;
}

std::optional<double> LexiconTable::lookup(std::string_view lowered_word) const
{
    auto it = entries_.find(lowered_word);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

LexiconTable load_lexicon(std::istream& in, std::string name, double lo, double hi)
{
    LexiconTable table(std::move(name), lo, hi);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool skip = false;
        auto row = strip_comment_line(line, skip);
        if (skip) continue;
        auto tab = row.find('\t');
        if (tab == std::string::npos) {
            throw DataError("lexicon '" + table.name() + "' line " + std::to_string(line_no) +
                            ": expected word<TAB>value");
        }
        auto word = trim(std::string_view(row).substr(0, tab));
        auto value = trim(std::string_view(row).substr(tab + 1));
        try {
            table.add(word, parse_double(value));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

LexiconTable load_lexicon_file(const std::string& path, std::string name, double lo, double hi)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open lexicon: " + path);
    return load_lexicon(in, std::move(name), lo, hi);
}

WordSet load_word_list(std::istream& in)
{
    WordSet words;
    std::string line;
    while (std::getline(in, line)) {
        bool skip = false;
        auto w = strip_comment_line(line, skip);
        if (!skip) words.insert(to_lower_ascii(w));
    }
    return words;
}

WordSet load_word_list_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open word list: " + path);
    return load_word_list(in);
}

void SentimentConfig::validate() const
{
    if (!(normalization_alpha > 0.0)) throw ConfigError("sentiment.normalization_alpha must be > 0");
    if (negation_window < 1) throw ConfigError("sentiment.negation_window must be >= 1");
}

bool is_emoticon(std::string_view token)
{
    return std::find(kEmoticons.begin(), kEmoticons.end(), token) != kEmoticons.end();
}

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        if (auto n = match_emoticon(text, i); n > 0) {
            tokens.emplace_back(text.substr(i, n));
            i += n;
            continue;
        }
        if (!is_token_char(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_token_char(static_cast<unsigned char>(text[j]))) ++j;
        auto word = text.substr(i, j - i);
        while (!word.empty() && word.front() == '\'') word.remove_prefix(1);
        while (!word.empty() && word.back() == '\'') word.remove_suffix(1);
        if (!word.empty()) tokens.push_back(to_lower_ascii(word));
        i = j;
    }
    return tokens;
}

std::vector<std::string> split_sentences(std::string_view text)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || is_sentence_end(text[i])) {
            auto frag = trim(text.substr(start, i - start));
            if (!frag.empty()) out.emplace_back(frag);
            while (i < text.size() && is_sentence_end(text[i])) ++i;
            start = i;
        }
    }
    return out;
}

double readability(std::string_view text, const WordSet& easy_words)
{
    std::size_t words = 0;
    std::size_t difficult = 0;
    for (const auto& tok : tokenize(text)) {
        if (is_emoticon(tok)) continue;
        ++words;
        if (easy_words.count(tok) == 0) ++difficult;
    }
    if (words == 0) return 0.0;
    auto sentences = std::max<std::size_t>(1, split_sentences(text).size());
    double pct_difficult = 100.0 * static_cast<double>(difficult) / static_cast<double>(words);
    double avg_sentence = static_cast<double>(words) / static_cast<double>(sentences);
    double score = 0.1579 * pct_difficult + 0.0496 * avg_sentence;
    if (pct_difficult > 5.0) score += 3.6365;
    return score;
}

std::optional<double> concreteness(std::span<const std::string> tokens, const LexiconTable& lexicon)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : tokens) {
        if (auto v = lexicon.lookup(t)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return std::clamp(sum / static_cast<double>(n), lexicon.min_value(), lexicon.max_value());
}

std::size_t text_length(std::string_view cleaned_text)
{
    return utf8_length(cleaned_text);
}

double sentiment_tokens(std::span<const std::string> tokens, const LexiconTable& valence, const SentimentConfig& cfg)
{
    double raw = 0.0;
    bool matched = false;
    const auto window = static_cast<std::size_t>(cfg.negation_window);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        auto v = valence.lookup(tokens[i]);
        if (!v || *v == 0.0) continue;
        matched = true;
        double value = *v;
        double sign = value > 0 ? 1.0 : -1.0;
        bool negated = false;
        for (std::size_t j = i > window ? i - window : 0; j < i; ++j) {
            if (auto b = boosters().find(tokens[j]); b != boosters().end()) {
                value += sign * cfg.booster_increment * b->second;
            }
            if (is_negator(tokens[j])) negated = true;
        }
        if (negated) value *= cfg.negation_factor;
        raw += value;
    }
    if (!matched) return 0.0;
    return std::clamp(raw / std::sqrt(raw * raw + cfg.normalization_alpha), -1.0, 1.0);
}

double sentiment(std::string_view text, const LexiconTable& valence, const SentimentConfig& cfg)
{
    auto tokens = tokenize(text);
    return sentiment_tokens(tokens, valence, cfg);
}

double subjectivity(std::span<const std::string> tokens, const LexiconTable& lexicon)
{
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : tokens) {
        if (auto v = lexicon.lookup(t)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return 0.0;
    return std::clamp(sum / static_cast<double>(n), 0.0, 1.0);
}

FeatureVector featurize(const TweetRecord& record, const Lexicons& lexicons, const TopicSet& topics,
                        const SentimentConfig& cfg)
{
    auto cleaned = extract_entities(record.text).cleaned_text;
    auto tokens = tokenize(cleaned);

    FeatureVector f;
    f.id = record.id;
    f.complexity.readability = readability(cleaned, lexicons.easy_words);
    f.complexity.concreteness = concreteness(tokens, lexicons.concreteness);
    f.complexity.length = text_length(cleaned);
    f.complexity.has_link = !record.urls.empty();
    f.valence.sentiment = sentiment_tokens(tokens, lexicons.valence, cfg);
    f.valence.subjectivity = subjectivity(tokens, lexicons.subjectivity);
    f.topics = topics;
    f.log_followers = std::log1p(static_cast<double>(record.author.followers));
    f.log_listed = std::log1p(static_cast<double>(record.author.listed));
    f.verified = record.author.verified;
    return f;
}

const std::vector<std::string>& feature_csv_header()
{
    static const std::vector<std::string> header = [] {
        std::vector<std::string> h = {"id",        "readability", "concreteness", "concreteness_missing",
                                      "length",    "has_link",    "sentiment",    "subjectivity"};
        for (auto t : all_topics()) h.emplace_back(topic_label(t));
        h.insert(h.end(), {"log_followers", "log_listed", "verified"});
        return h;
    }();
    return header;
}

void write_features_csv(std::ostream& out, std::span<const FeatureVector> features)
{
    const auto& header = feature_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& f : features) {
        out << csv_escape(f.id) << ',' << format_double(f.complexity.readability) << ','
            << (f.complexity.concreteness ? format_double(*f.complexity.concreteness) : std::string()) << ','
            << (f.concreteness_missing() ? 1 : 0) << ',' << f.complexity.length << ','
            << (f.complexity.has_link ? 1 : 0) << ',' << format_double(f.valence.sentiment) << ','
            << format_double(f.valence.subjectivity);
        for (auto t : all_topics()) out << ',' << (f.topics.has(t) ? 1 : 0);
        out << ',' << format_double(f.log_followers) << ',' << format_double(f.log_listed) << ','
            << (f.verified ? 1 : 0) << '\n';
    }
}

std::vector<FeatureVector> read_features_csv(std::istream& in)
{
    const auto& header = feature_csv_header();
    std::string line;
    if (!std::getline(in, line) || parse_csv_line(line) != header) {
        throw DataError("features.csv: unexpected header");
    }
    auto flag = [](const std::string& s) {
        if (s == "1") return true;
        if (s == "0") return false;
        throw DataError("features.csv: expected 0/1, got '" + s + "'");
    };
    std::vector<FeatureVector> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = parse_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("features.csv line " + std::to_string(line_no) + ": wrong field count");
        }
        FeatureVector f;
        f.id = fields[0];
        f.complexity.readability = parse_double(fields[1]);
        if (!fields[2].empty()) f.complexity.concreteness = parse_double(fields[2]);
        f.complexity.length = static_cast<std::size_t>(parse_double(fields[4]));
        f.complexity.has_link = flag(fields[5]);
        f.valence.sentiment = parse_double(fields[6]);
        f.valence.subjectivity = parse_double(fields[7]);
        std::size_t k = 8;
        for (auto t : all_topics()) {
            if (flag(fields[k++])) f.topics.set(t);
        }
        f.log_followers = parse_double(fields[k++]);
        f.log_listed = parse_double(fields[k++]);
        f.verified = flag(fields[k++]);
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace engage
