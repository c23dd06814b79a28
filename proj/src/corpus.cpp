#include "engage/corpus.hpp"

#include "engage/error.hpp"
#include "engage/stats.hpp"
#include "engage/text_util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace engage {

namespace {

bool is_word_char(char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_space(char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool starts_with_url(std::string_view s)
{
    return s.starts_with("http://") || s.starts_with("https://");
}

std::string collapse_whitespace(std::string_view s)
{
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::int64_t read_count(const nlohmann::json& obj, const char* key, bool required)
{
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (required) throw DataError(std::string("missing ") + key);
        return 0;
    }
    if (!it->is_number_integer()) throw DataError(std::string(key) + " is not an integer");
    auto v = it->get<std::int64_t>();
    if (v < 0) throw DataError(std::string(key) + " is negative");
    return v;
}

std::vector<std::string> read_string_list(const nlohmann::json& v, const char* key)
{
    if (!v.is_array()) throw DataError(std::string(key) + " is not a list");
    std::vector<std::string> out;
    for (const auto& e : v) {
        if (!e.is_string()) throw DataError(std::string(key) + " contains a non-string");
        out.push_back(e.get<std::string>());
    }
    return out;
}

TweetRecord record_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) throw DataError("record is not an object");
    TweetRecord r;

    auto id = j.find("id");
    if (id == j.end()) throw DataError("missing id");
    if (!id->is_string() || id->get<std::string>().empty()) throw DataError("id must be a non-empty string");
    r.id = id->get<std::string>();

    auto text = j.find("text");
    if (text == j.end()) throw DataError("missing text");
    if (!text->is_string()) throw DataError("text is not a string");
    r.text = text->get<std::string>();

    auto hashtags = j.find("hashtags");
    auto urls = j.find("urls");
    if (hashtags == j.end() || urls == j.end()) {
        auto ent = extract_entities(r.text);
        r.hashtags = std::move(ent.hashtags);
        r.urls = std::move(ent.urls);
    }
    if (hashtags != j.end()) {
        r.hashtags.clear();
        for (auto& h : read_string_list(*hashtags, "hashtags")) {
            std::string_view v = h;
            if (v.starts_with('#')) v.remove_prefix(1);
            r.hashtags.push_back(to_lower_ascii(v));
        }
    }
    if (urls != j.end()) r.urls = read_string_list(*urls, "urls");

    if (auto a = j.find("author"); a != j.end()) {
        if (!a->is_object()) throw DataError("author is not an object");
        r.author.followers = read_count(*a, "followers", false);
        r.author.listed = read_count(*a, "listed", false);
        if (auto v = a->find("verified"); v != a->end()) {
            if (!v->is_boolean()) throw DataError("verified is not a boolean");
            r.author.verified = v->get<bool>();
        }
    }

    auto c = j.find("counts");
    if (c == j.end() || !c->is_object()) throw DataError("missing counts");
    r.counts.likes = read_count(*c, "likes", true);
    r.counts.retweets = read_count(*c, "retweets", true);
    r.counts.comments = read_count(*c, "comments", true);
    return r;
}

}  // namespace

std::int64_t EngagementCounts::max() const
{
    return std::max({likes, retweets, comments});
}

Entities extract_entities(std::string_view text)
{
    Entities out;
    std::string kept;
    kept.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        auto rest = text.substr(i);
        if (starts_with_url(rest)) {
            std::size_t j = i;
            while (j < text.size() && !is_space(text[j])) ++j;
            out.urls.emplace_back(text.substr(i, j - i));
            i = j;
            continue;
        }
        if (text[i] == '#' && i + 1 < text.size() && is_word_char(text[i + 1])) {
            std::size_t j = i + 1;
            while (j < text.size() && is_word_char(text[j])) ++j;
            out.hashtags.push_back(to_lower_ascii(text.substr(i + 1, j - i - 1)));
            i = j;
            continue;
        }
        kept.push_back(text[i]);
        ++i;
    }
    out.cleaned_text = collapse_whitespace(kept);
    return out;
}

ParseResult parse_records(std::istream& in)
{
    ParseResult result;
    std::set<std::string, std::less<>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        TweetRecord rec;
        try {
            rec = record_from_json(nlohmann::json::parse(line));
        } catch (const nlohmann::json::parse_error&) {
            result.errors.push_back({line_no, "malformed JSON"});
            continue;
        } catch (const DataError& e) {
            result.errors.push_back({line_no, e.what()});
            continue;
        }
        if (!seen.insert(rec.id).second) {
            throw DataError("duplicate id '" + rec.id + "' at line " + std::to_string(line_no));
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

void write_record(std::ostream& out, const TweetRecord& r)
{
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["text"] = r.text;
    j["hashtags"] = r.hashtags;
    j["urls"] = r.urls;
    j["author"] = {{"followers", r.author.followers}, {"listed", r.author.listed}, {"verified", r.author.verified}};
    j["counts"] = {{"likes", r.counts.likes}, {"retweets", r.counts.retweets}, {"comments", r.counts.comments}};
    out << j.dump() << '\n';
}

void write_records(std::ostream& out, const std::vector<TweetRecord>& records)
{
    for (const auto& r : records) write_record(out, r);
}

void FilterConfig::validate() const
{
    if (min_each_engagement < 0) throw ConfigError("filter.min_each_engagement must be >= 0");
    if (min_any_engagement < 0) throw ConfigError("filter.min_any_engagement must be >= 0");
    if (min_ascii_ratio < 0.0 || min_ascii_ratio > 1.0) throw ConfigError("filter.min_ascii_ratio must be in [0, 1]");
}

std::size_t CorpusSnapshot::excluded_total() const
{
    std::size_t total = 0;
    for (const auto& [reason, n] : exclusions) total += n;
    return total;
}

CorpusSnapshot apply_filters(std::vector<TweetRecord> records, const FilterConfig& cfg, const TopicLexicon* lexicon)
{
    cfg.validate();
    if (cfg.require_lexicon_hashtag && lexicon == nullptr) {
        throw ConfigError("hashtag filter requires a topic lexicon");
    }

    CorpusSnapshot snap;
    snap.filter = cfg;
    std::array<std::size_t, kExclusionReasons.size()> excluded{};

    auto exclusion_reason = [&](const TweetRecord& r) -> int {
        if (cfg.require_text && extract_entities(r.text).cleaned_text.empty()) return 0;
        const auto& c = r.counts;
        if (std::min({c.likes, c.retweets, c.comments}) < cfg.min_each_engagement) return 1;
        if (c.max() < cfg.min_any_engagement) return 2;
        if (cfg.require_lexicon_hashtag &&
            std::none_of(r.hashtags.begin(), r.hashtags.end(),
                         [&](const std::string& h) { return lexicon->contains(h); })) {
            return 3;
        }
        if (cfg.min_ascii_ratio > 0.0 && ascii_ratio(r.text) < cfg.min_ascii_ratio) return 4;
        return -1;
    };

    for (auto& r : records) {
        int reason = exclusion_reason(r);
        if (reason < 0) {
            snap.records.push_back(std::move(r));
        } else {
            ++excluded[static_cast<std::size_t>(reason)];
        }
    }
    std::sort(snap.records.begin(), snap.records.end(),
              [](const TweetRecord& a, const TweetRecord& b) { return a.id < b.id; });
    for (std::size_t i = 0; i < kExclusionReasons.size(); ++i) {
        snap.exclusions.emplace_back(std::string(kExclusionReasons[i]), excluded[i]);
    }
    return snap;
}

double pearson(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size() || a.size() < 2) throw NumericalError("correlation needs two equal samples of size >= 2");
    double ma = mean(a);
    double mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma;
        double db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0) throw NumericalError("correlation undefined for a constant column");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

CorpusStats summarize(const CorpusSnapshot& corpus)
{
    const auto& recs = corpus.records;
    if (recs.size() < 2) throw NumericalError("summary needs at least two records (correlation undefined)");

    std::array<std::vector<double>, 3> cols;
    CorpusStats s;
    s.records = recs.size();
    for (const auto& r : recs) {
        cols[0].push_back(static_cast<double>(r.counts.likes));
        cols[1].push_back(static_cast<double>(r.counts.retweets));
        cols[2].push_back(static_cast<double>(r.counts.comments));
        (r.urls.empty() ? s.without_link : s.with_link)++;
        (r.author.verified ? s.verified : s.unverified)++;
    }
    for (std::size_t k = 0; k < 3; ++k) {
        auto [lo, hi] = std::minmax_element(cols[k].begin(), cols[k].end());
        auto& d = s.distributions[k];
        d.min = static_cast<std::int64_t>(*lo);
        d.max = static_cast<std::int64_t>(*hi);
        d.mean = mean(cols[k]);
        d.median = quantile(cols[k], 0.5);
        d.p90 = quantile(cols[k], 0.9);
    }
    s.corr_likes_retweets = pearson(cols[0], cols[1]);
    s.corr_likes_comments = pearson(cols[0], cols[2]);
    s.corr_retweets_comments = pearson(cols[1], cols[2]);
    return s;
}

void write_summary(std::ostream& out, const CorpusStats& s)
{
    constexpr std::array<const char*, 3> names = {"likes", "retweets", "comments"};
    out << "records=" << s.records << '\n';
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& d = s.distributions[k];
        out << names[k] << ".min=" << d.min << '\n'
            << names[k] << ".max=" << d.max << '\n'
            << names[k] << ".mean=" << format_double(d.mean) << '\n'
            << names[k] << ".median=" << format_double(d.median) << '\n'
            << names[k] << ".p90=" << format_double(d.p90) << '\n';
    }
    out << "corr.likes_retweets=" << format_double(s.corr_likes_retweets) << '\n'
        << "corr.likes_comments=" << format_double(s.corr_likes_comments) << '\n'
        << "corr.retweets_comments=" << format_double(s.corr_retweets_comments) << '\n'
        << "links.with=" << s.with_link << '\n'
        << "links.without=" << s.without_link << '\n'
        << "authors.verified=" << s.verified << '\n'
        << "authors.unverified=" << s.unverified << '\n';
}

void write_exclusions_csv(std::ostream& out, const CorpusSnapshot& corpus)
{
    out << "reason,count\n";
    for (const auto& [reason, n] : corpus.exclusions) out << reason << ',' << n << '\n';
}

}  // namespace engage
