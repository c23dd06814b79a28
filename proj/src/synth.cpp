#include "engage/synth.hpp"

#include "engage/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace engage {

namespace {

// Relative topic frequencies of the annotated reference corpus, in Topic order.
constexpr std::array<double, kTopicCount> kTopicWeights = {
    41932, 57890, 32210, 59998, 89771, 74714, 96254, 60048, 27408, 30768, 17212, 202467,
};

constexpr double kMaxCount = 1e9;

enum class Stream : std::uint32_t { Counts = 0, Content = 1 };

std::mt19937_64 substream(std::uint64_t seed, std::size_t index, Stream s)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(std::uint64_t(index) >> 32),
                      static_cast<std::uint32_t>(s)};
    return std::mt19937_64(seq);
}

bool plain_word(const std::string& w)
{
    return !w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

struct Vocabulary {
    std::vector<std::string> easy;
    std::vector<std::string> hard;
    std::vector<std::string> valenced;
    std::vector<std::string> subjective;
    std::array<std::vector<std::string>, kTopicCount> hashtags;
};

Vocabulary build_vocabulary(const Lexicons& lex, const TopicLexicon& topics)
{
    Vocabulary v;
    for (const auto& w : lex.easy_words) {
        if (plain_word(w)) v.easy.push_back(w);
    }
    for (const auto& [w, val] : lex.concreteness.entries()) {
        if (plain_word(w) && lex.easy_words.count(w) == 0 && !lex.valence.lookup(w)) v.hard.push_back(w);
    }
    for (const auto& [w, val] : lex.valence.entries()) {
        if (plain_word(w) && val != 0.0) v.valenced.push_back(w);
    }
    for (const auto& [w, val] : lex.subjectivity.entries()) {
        if (plain_word(w)) v.subjective.push_back(w);
    }
    if (v.easy.empty()) v.easy = {"the", "a", "we", "go", "see", "day", "good", "new", "one", "time"};
    if (v.hard.empty()) v.hard = {"infrastructure", "regulation", "hypothesis", "algorithm", "quarterly"};
    for (auto t : all_topics()) v.hashtags[static_cast<std::size_t>(t)] = topics.hashtags_for(t);
    return v;
}

template <class Rng>
const std::string& pick(const std::vector<std::string>& words, Rng& rng)
{
    std::uniform_int_distribution<std::size_t> d(0, words.size() - 1);
    return words[d(rng)];
}

template <class Rng>
std::string make_sentence(const Vocabulary& v, Rng& rng)
{
    std::uniform_int_distribution<int> len(3, 12);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int words = len(rng);
    std::string s;
    for (int i = 0; i < words; ++i) {
        std::string w;
        double r = u(rng);
        if (r < 0.10 && !v.valenced.empty()) {
            if (u(rng) < 0.15) w = "not ";
            w += pick(v.valenced, rng);
        } else if (r < 0.16 && !v.subjective.empty()) {
            w = pick(v.subjective, rng);
        } else if (r < 0.38) {
            w = pick(v.hard, rng);
        } else {
            w = pick(v.easy, rng);
        }
        if (i == 0 && !w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!s.empty()) s.push_back(' ');
        s += w;
    }
    constexpr std::array<char, 3> ends = {'.', '!', '?'};
    std::discrete_distribution<int> end({0.8, 0.12, 0.08});
    s.push_back(ends[static_cast<std::size_t>(end(rng))]);
    return s;
}

std::string record_id(std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "syn%09zu", i);
    return buf;
}

// Log-counts before planted effects.
std::array<double, 3> draw_log_counts(const SynthConfig& cfg, std::size_t index)
{
    auto rng = substream(cfg.rng_seed, index, Stream::Counts);
    std::normal_distribution<double> normal(0.0, 1.0);
    double z = cfg.popularity_sigma * normal(rng);
    std::array<double, 3> out{};
    for (std::size_t t = 0; t < 3; ++t) {
        out[t] = cfg.base_log[t] + cfg.type_loadings[t] * z + cfg.type_noise[t] * normal(rng);
    }
    return out;
}

std::int64_t to_count(double log_count)
{
    double c = std::round(std::exp(std::min(log_count, std::log(kMaxCount))));
    return static_cast<std::int64_t>(std::max(1.0, c));
}

}  // namespace

std::string_view engagement_name(EngagementType t)
{
    switch (t) {
    case EngagementType::Likes: return "likes";
    case EngagementType::Retweets: return "retweets";
    case EngagementType::Comments: return "comments";
    }
    return "?";
}

EngagementType parse_engagement(std::string_view name)
{
    for (auto t : kEngagementTypes) {
        if (engagement_name(t) == name) return t;
    }
    throw ConfigError("unknown engagement type '" + std::string(name) + "'");
}

std::int64_t count_of(const EngagementCounts& c, EngagementType t)
{
    switch (t) {
    case EngagementType::Likes: return c.likes;
    case EngagementType::Retweets: return c.retweets;
    case EngagementType::Comments: return c.comments;
    }
    return 0;
}

double planted_feature_value(const FeatureVector& f, std::string_view feature)
{
    if (feature == "has_link") return f.complexity.has_link ? 1.0 : 0.0;
    if (feature == "verified") return f.verified ? 1.0 : 0.0;
    if (feature == "readability") return f.complexity.readability;
    if (feature == "concreteness") return f.complexity.concreteness.value_or(0.0);
    if (feature == "length") return static_cast<double>(f.complexity.length);
    if (feature == "sentiment") return f.valence.sentiment;
    if (feature == "subjectivity") return f.valence.subjectivity;
    if (feature == "log_followers") return f.log_followers;
    if (feature == "log_listed") return f.log_listed;
    if (auto t = parse_topic_label(feature)) return f.topics.has(*t) ? 1.0 : 0.0;
    throw ConfigError("unknown planted feature '" + std::string(feature) + "'");
}

void SynthConfig::validate() const
{
    if (n < 1) throw ConfigError("synth.n must be >= 1");
    if (!(popularity_sigma >= 0.0)) throw ConfigError("synth.popularity_sigma must be >= 0");
    for (double s : type_noise) {
        if (!(s >= 0.0)) throw ConfigError("synth.type_noise must be >= 0");
    }
    for (double r : target_correlations) {
        if (!(r > -1.0 && r <= 1.0)) throw ConfigError("synth.target_correlations must be in (-1, 1]");
    }
    for (double p : {link_rate, verified_rate, multi_topic_rate}) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("synth rates must be in [0, 1]");
    }
    FeatureVector probe;
    for (const auto& e : planted_effects) planted_feature_value(probe, e.feature);
}

std::vector<EngagementCounts> generate_counts(const SynthConfig& cfg)
{
    cfg.validate();
    std::vector<EngagementCounts> out(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        auto lc = draw_log_counts(cfg, i);
        out[i] = {to_count(lc[0]), to_count(lc[1]), to_count(lc[2])};
    }
    return out;
}

std::vector<TweetRecord> generate(const SynthConfig& cfg, const Lexicons& lexicons, const TopicLexicon& topics)
{
    cfg.validate();
    const auto vocab = build_vocabulary(lexicons, topics);
    std::discrete_distribution<std::size_t> topic_dist(kTopicWeights.begin(), kTopicWeights.end());

    std::vector<TweetRecord> out;
    out.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        auto rng = substream(cfg.rng_seed, i, Stream::Content);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> normal(0.0, 1.0);

        TweetRecord r;
        r.id = record_id(i);

        std::uniform_int_distribution<int> nsent(1, 3);
        int sentences = nsent(rng);
        for (int s = 0; s < sentences; ++s) {
            if (s > 0) r.text.push_back(' ');
            r.text += make_sentence(vocab, rng);
        }

        std::vector<std::size_t> chosen;
        std::size_t wanted = u(rng) < cfg.multi_topic_rate ? 2 : 1;
        for (int guard = 0; chosen.size() < wanted && guard < 64; ++guard) {
            auto t = topic_dist(rng);
            if (vocab.hashtags[t].empty()) continue;
            if (std::find(chosen.begin(), chosen.end(), t) != chosen.end()) continue;
            chosen.push_back(t);
        }
        for (auto t : chosen) {
            const auto& tag = pick(vocab.hashtags[t], rng);
            r.text += " #" + tag;
            if (std::find(r.hashtags.begin(), r.hashtags.end(), tag) == r.hashtags.end()) r.hashtags.push_back(tag);
        }
        if (u(rng) < cfg.link_rate) {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "https://t.co/%016llx", static_cast<unsigned long long>(rng()));
            r.urls.emplace_back(buf);
            r.text += ' ';
            r.text += buf;
        }

        r.author.followers = to_count(6.0 + 2.0 * normal(rng)) - 1;
        r.author.listed = static_cast<std::int64_t>(std::floor(static_cast<double>(r.author.followers) * 0.02 * u(rng)));
        r.author.verified = u(rng) < cfg.verified_rate;

        auto lc = draw_log_counts(cfg, i);
        if (!cfg.planted_effects.empty()) {
            auto f = featurize(r, lexicons, tag(r.hashtags, topics));
            for (const auto& e : cfg.planted_effects) {
                lc[static_cast<std::size_t>(e.target)] += e.effect * planted_feature_value(f, e.feature);
            }
        }
        r.counts = {to_count(lc[0]), to_count(lc[1]), to_count(lc[2])};
        out.push_back(std::move(r));
    }
    return out;
}

std::array<double, 3> count_correlations(const std::vector<EngagementCounts>& counts)
{
    std::vector<double> l, rt, c;
    l.reserve(counts.size());
    rt.reserve(counts.size());
    c.reserve(counts.size());
    for (const auto& x : counts) {
        l.push_back(static_cast<double>(x.likes));
        rt.push_back(static_cast<double>(x.retweets));
        c.push_back(static_cast<double>(x.comments));
    }
    return {pearson(l, rt), pearson(l, c), pearson(rt, c)};
}

namespace {

// Loadings for which lognormal raw-count correlations equal `rho` when every
// type's log-variance is s^2: corr_ij = (exp(l_i l_j s^2) - 1) / (exp(s^2) - 1).
std::array<double, 3> solve_loadings(const std::array<double, 3>& rho, double s2)
{
    auto g = [&](double r) { return std::log1p(r * std::expm1(s2)) / s2; };
    const double g01 = g(rho[0]);
    const double g02 = g(rho[1]);
    const double g12 = g(rho[2]);
    auto one = [](double gij, double gik, double gjk) {
        double num = gij * gik;
        if (gjk == 0.0) {
            if (num == 0.0) return 0.0;
            throw ConfigError("target correlations are infeasible for a one-factor model; use a two-factor config");
        }
        double sq = num / gjk;
        if (sq < -1e-12 || sq > 1.0 + 1e-9 || !std::isfinite(sq)) {
            throw ConfigError("target correlations are infeasible for a one-factor model; use a two-factor config");
        }
        return std::sqrt(std::clamp(sq, 0.0, 1.0));
    };
    std::array<double, 3> lambda = {one(g01, g02, g12), one(g01, g12, g02), one(g02, g12, g01)};
    // Signs: choose the first loading positive; the others follow the sign of their products.
    if (g01 < 0) lambda[1] = -lambda[1];
    if (g02 < 0) lambda[2] = -lambda[2];
    return lambda;
}

}  // namespace

Calibration calibrate_correlations(const SynthConfig& base, std::array<double, 3> targets, double tol,
                                   std::size_t mc_n, std::uint64_t mc_seed)
{
    for (double r : targets) {
        if (!(r > -1.0 && r <= 1.0)) throw ConfigError("target correlations must be in (-1, 1]");
    }
    if (!(tol > 0.0)) throw ConfigError("calibration tolerance must be > 0");
    if (mc_n < 10) throw ConfigError("calibration needs at least 10 Monte-Carlo records");
    const double s = base.popularity_sigma;
    if (!(s > 0.0)) throw ConfigError("calibration needs popularity_sigma > 0");
    const double s2 = s * s;

    auto params = [&](const std::array<double, 3>& rho) {
        auto lambda = solve_loadings(rho, s2);
        std::array<double, 3> noise{};
        for (std::size_t t = 0; t < 3; ++t) noise[t] = s * std::sqrt(std::max(0.0, 1.0 - lambda[t] * lambda[t]));
        return std::make_pair(lambda, noise);
    };

    SynthConfig sim = base;
    sim.n = mc_n;
    sim.rng_seed = mc_seed;
    sim.planted_effects.clear();

    Calibration best;
    double best_err = std::numeric_limits<double>::infinity();
    std::array<double, 3> effective = targets;
    constexpr int kMaxIterations = 40;
    for (int it = 1; it <= kMaxIterations; ++it) {
        auto [lambda, noise] = params(effective);
        sim.type_loadings = lambda;
        sim.type_noise = noise;
        auto est = count_correlations(generate_counts(sim));
        double err = 0.0;
        for (std::size_t k = 0; k < 3; ++k) err = std::max(err, std::abs(est[k] - targets[k]));
        if (err < best_err) {
            best_err = err;
            best.type_loadings = lambda;
            best.type_noise = noise;
            best.achieved = est;
            best.iterations = it;
        }
        if (err <= tol) {
            best.within_tol = true;
            break;
        }
        // Fixed-point correction of the analytic targets; round-off from
        // integer rounding and the count floor is what this absorbs.
        bool moved = false;
        for (std::size_t k = 0; k < 3; ++k) {
            double next = std::clamp(effective[k] + (targets[k] - est[k]), -0.999, 1.0);
            moved = moved || next != effective[k];
            effective[k] = next;
        }
        if (!moved) break;
        try {
            params(effective);
        } catch (const ConfigError&) {
            break;
        }
    }
    return best;
}

}  // namespace engage
