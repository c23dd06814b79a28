#include "engage/config.hpp"

#include "engage/error.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>

#ifndef ENGAGE_DATA_DIR
#define ENGAGE_DATA_DIR "data"
#endif

namespace engage {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed)
{
    if (!obj.is_object()) throw ConfigError((where.empty() ? "config" : where) + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError("unknown config key '" + where + (where.empty() ? "" : ".") + key + "'");
        }
    }
}

std::string key_name(const std::string& where, std::string_view key)
{
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

double get_number(const json& obj, const std::string& where, std::string_view key, double fallback)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number()) throw ConfigError(key_name(where, key) + " must be a number");
    return it->get<double>();
}

std::int64_t get_int(const json& obj, const std::string& where, std::string_view key, std::int64_t fallback)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_number_integer()) throw ConfigError(key_name(where, key) + " must be an integer");
    return it->get<std::int64_t>();
}

bool get_bool(const json& obj, const std::string& where, std::string_view key, bool fallback)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_boolean()) throw ConfigError(key_name(where, key) + " must be true or false");
    return it->get<bool>();
}

std::optional<std::string> get_string(const json& obj, const std::string& where, std::string_view key)
{
    auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_string()) throw ConfigError(key_name(where, key) + " must be a string");
    return it->get<std::string>();
}

std::vector<std::string> get_string_list(const json& obj, const std::string& where, std::string_view key,
                                         std::vector<std::string> fallback)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array()) throw ConfigError(key_name(where, key) + " must be a list of strings");
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw ConfigError(key_name(where, key) + " must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::array<double, 3> get_triple(const json& obj, const std::string& where, std::string_view key,
                                 std::array<double, 3> fallback)
{
    auto it = obj.find(key);
    if (it == obj.end()) return fallback;
    if (!it->is_array() || it->size() != 3) throw ConfigError(key_name(where, key) + " must be a list of 3 numbers");
    std::array<double, 3> out{};
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(*it)[k].is_number()) throw ConfigError(key_name(where, key) + " must be a list of 3 numbers");
        out[k] = (*it)[k].get<double>();
    }
    return out;
}

fs::path resolve(const fs::path& base, const std::string& p)
{
    fs::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

std::uint64_t as_seed(std::int64_t v, const std::string& key)
{
    if (v < 0) throw ConfigError(key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
}

}  // namespace

fs::path default_data_dir()
{
    return fs::path(ENGAGE_DATA_DIR);
}

RunConfig default_run_config()
{
    RunConfig c;
    auto d = default_data_dir();
    c.lexicons = {d / "topic_lexicon.csv", d / "valence.tsv", d / "subjectivity.tsv", d / "concreteness.tsv",
                  d / "easy_words.txt"};
    return c;
}

void RunConfig::validate() const
{
    pipeline.validate();
    synth.validate();
    if (!(comment_noise_scale >= 0.0)) throw ConfigError("synth.comment_noise_scale must be >= 0");
}

RunConfig parse_run_config(const json& j, const fs::path& base_dir)
{
    RunConfig c = default_run_config();
    check_keys(j, "",
               {"input", "lexicons", "tau", "quantile_scale", "prediction_floor", "filter", "robustness_min_any",
                "log_transform_columns", "ols_variants", "se", "solver", "sentiment", "cv", "synth"});

    if (auto s = get_string(j, "", "input")) c.input = resolve(base_dir, *s);

    if (auto it = j.find("lexicons"); it != j.end()) {
        check_keys(*it, "lexicons", {"topics", "valence", "subjectivity", "concreteness", "easy_words"});
        auto set = [&](std::string_view key, fs::path& dst) {
            if (auto s = get_string(*it, "lexicons", key)) dst = resolve(base_dir, *s);
        };
        set("topics", c.lexicons.topics);
        set("valence", c.lexicons.valence);
        set("subjectivity", c.lexicons.subjectivity);
        set("concreteness", c.lexicons.concreteness);
        set("easy_words", c.lexicons.easy_words);
    }

    auto& p = c.pipeline;
    p.tau = get_number(j, "", "tau", p.tau);
    if (auto s = get_string(j, "", "quantile_scale")) p.quantile_scale = parse_quantile_scale(*s);
    p.prediction_floor = get_number(j, "", "prediction_floor", p.prediction_floor);
    p.robustness_min_any = get_int(j, "", "robustness_min_any", p.robustness_min_any);
    p.log_transform_columns = get_string_list(j, "", "log_transform_columns", p.log_transform_columns);
    if (j.contains("ols_variants")) {
        p.ols_variants.clear();
        for (const auto& v : get_string_list(j, "", "ols_variants", {})) {
            auto parsed = parse_ols_variant(v);
            if (std::find(p.ols_variants.begin(), p.ols_variants.end(), parsed) != p.ols_variants.end()) {
                throw ConfigError("ols_variants lists '" + v + "' twice");
            }
            p.ols_variants.push_back(parsed);
        }
    }
    if (auto s = get_string(j, "", "se"); s && *s != "HC1") {
        throw ConfigError("se must be HC1, got '" + *s + "'");
    }

    if (auto it = j.find("filter"); it != j.end()) {
        const std::string w = "filter";
        check_keys(*it, w,
                   {"require_text", "min_each_engagement", "min_any_engagement", "require_lexicon_hashtag",
                    "min_ascii_ratio"});
        auto& f = p.filter;
        f.require_text = get_bool(*it, w, "require_text", f.require_text);
        f.min_each_engagement = get_int(*it, w, "min_each_engagement", f.min_each_engagement);
        f.min_any_engagement = get_int(*it, w, "min_any_engagement", f.min_any_engagement);
        f.require_lexicon_hashtag = get_bool(*it, w, "require_lexicon_hashtag", f.require_lexicon_hashtag);
        f.min_ascii_ratio = get_number(*it, w, "min_ascii_ratio", f.min_ascii_ratio);
    }

    if (auto it = j.find("solver"); it != j.end()) {
        const std::string w = "solver";
        check_keys(*it, w, {"method", "epsilon", "tol", "max_iter", "polish"});
        auto& s = p.solver;
        if (auto m = get_string(*it, w, "method")) s.method = parse_solver_method(*m);
        s.epsilon = get_number(*it, w, "epsilon", s.epsilon);
        s.tol = get_number(*it, w, "tol", s.tol);
        s.max_iter = static_cast<int>(get_int(*it, w, "max_iter", s.max_iter));
        s.polish = get_bool(*it, w, "polish", s.polish);
    }

    if (auto it = j.find("sentiment"); it != j.end()) {
        const std::string w = "sentiment";
        check_keys(*it, w, {"normalization_alpha", "booster_increment", "negation_factor", "negation_window"});
        auto& s = p.sentiment;
        s.normalization_alpha = get_number(*it, w, "normalization_alpha", s.normalization_alpha);
        s.booster_increment = get_number(*it, w, "booster_increment", s.booster_increment);
        s.negation_factor = get_number(*it, w, "negation_factor", s.negation_factor);
        s.negation_window = static_cast<int>(get_int(*it, w, "negation_window", s.negation_window));
    }

    if (auto it = j.find("cv"); it != j.end()) {
        check_keys(*it, "cv", {"k", "seed"});
        p.cv_k = static_cast<int>(get_int(*it, "cv", "k", p.cv_k));
        p.cv_seed = as_seed(get_int(*it, "cv", "seed", static_cast<std::int64_t>(p.cv_seed)), "cv.seed");
    }

    if (auto it = j.find("synth"); it != j.end()) {
        const std::string w = "synth";
        check_keys(*it, w,
                   {"n", "seed", "popularity_sigma", "base_log", "type_loadings", "type_noise", "target_correlations",
                    "link_rate", "verified_rate", "multi_topic_rate", "planted_effects", "comment_noise_scale"});
        auto& s = c.synth;
        auto n = get_int(*it, w, "n", static_cast<std::int64_t>(s.n));
        if (n < 1) throw ConfigError("synth.n must be >= 1");
        s.n = static_cast<std::size_t>(n);
        s.rng_seed = as_seed(get_int(*it, w, "seed", static_cast<std::int64_t>(s.rng_seed)), "synth.seed");
        s.popularity_sigma = get_number(*it, w, "popularity_sigma", s.popularity_sigma);
        s.base_log = get_triple(*it, w, "base_log", s.base_log);
        s.type_loadings = get_triple(*it, w, "type_loadings", s.type_loadings);
        s.type_noise = get_triple(*it, w, "type_noise", s.type_noise);
        s.target_correlations = get_triple(*it, w, "target_correlations", s.target_correlations);
        s.link_rate = get_number(*it, w, "link_rate", s.link_rate);
        s.verified_rate = get_number(*it, w, "verified_rate", s.verified_rate);
        s.multi_topic_rate = get_number(*it, w, "multi_topic_rate", s.multi_topic_rate);
        c.comment_noise_scale = get_number(*it, w, "comment_noise_scale", c.comment_noise_scale);
        if (auto pe = it->find("planted_effects"); pe != it->end()) {
            if (!pe->is_array()) throw ConfigError("synth.planted_effects must be a list");
            for (const auto& e : *pe) {
                const std::string ew = "synth.planted_effects[]";
                check_keys(e, ew, {"feature", "target", "effect"});
                PlantedEffect eff;
                auto feature = get_string(e, ew, "feature");
                auto target = get_string(e, ew, "target");
                if (!feature || !target || !e.contains("effect")) {
                    throw ConfigError("synth.planted_effects entries need feature, target and effect");
                }
                eff.feature = *feature;
                eff.target = parse_engagement(*target);
                eff.effect = get_number(e, ew, "effect", 0.0);
                s.planted_effects.push_back(std::move(eff));
            }
        }
    }

    c.validate();
    return c;
}

RunConfig load_run_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_run_config(j, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

json to_json(const RunConfig& c)
{
    const auto& p = c.pipeline;
    json j;
    j["input"] = c.input.string();
    j["lexicons"] = {{"topics", c.lexicons.topics.string()},
                     {"valence", c.lexicons.valence.string()},
                     {"subjectivity", c.lexicons.subjectivity.string()},
                     {"concreteness", c.lexicons.concreteness.string()},
                     {"easy_words", c.lexicons.easy_words.string()}};
    j["tau"] = p.tau;
    j["quantile_scale"] = std::string(quantile_scale_name(p.quantile_scale));
    j["prediction_floor"] = p.prediction_floor;
    j["robustness_min_any"] = p.robustness_min_any;
    j["log_transform_columns"] = p.log_transform_columns;
    json variants = json::array();
    for (auto v : p.ols_variants) variants.push_back(std::string(ols_variant_name(v)));
    j["ols_variants"] = variants;
    j["se"] = "HC1";
    j["filter"] = {{"require_text", p.filter.require_text},
                   {"min_each_engagement", p.filter.min_each_engagement},
                   {"min_any_engagement", p.filter.min_any_engagement},
                   {"require_lexicon_hashtag", p.filter.require_lexicon_hashtag},
                   {"min_ascii_ratio", p.filter.min_ascii_ratio}};
    j["solver"] = {{"method", std::string(solver_method_name(p.solver.method))},
                   {"epsilon", p.solver.epsilon},
                   {"tol", p.solver.tol},
                   {"max_iter", p.solver.max_iter},
                   {"polish", p.solver.polish}};
    j["sentiment"] = {{"normalization_alpha", p.sentiment.normalization_alpha},
                      {"booster_increment", p.sentiment.booster_increment},
                      {"negation_factor", p.sentiment.negation_factor},
                      {"negation_window", p.sentiment.negation_window}};
    j["cv"] = {{"k", p.cv_k}, {"seed", p.cv_seed}};
    json effects = json::array();
    for (const auto& e : c.synth.planted_effects) {
        effects.push_back({{"feature", e.feature}, {"target", std::string(engagement_name(e.target))}, {"effect", e.effect}});
    }
    const auto& s = c.synth;
    j["synth"] = {{"n", s.n},
                  {"seed", s.rng_seed},
                  {"popularity_sigma", s.popularity_sigma},
                  {"base_log", s.base_log},
                  {"type_loadings", s.type_loadings},
                  {"type_noise", s.type_noise},
                  {"target_correlations", s.target_correlations},
                  {"link_rate", s.link_rate},
                  {"verified_rate", s.verified_rate},
                  {"multi_topic_rate", s.multi_topic_rate},
                  {"planted_effects", effects},
                  {"comment_noise_scale", c.comment_noise_scale}};
    return j;
}

PlantedEffect parse_planted_effect(std::string_view spec)
{
    auto a = spec.find(':');
    auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
    if (b == std::string_view::npos) {
        throw ConfigError("planted effect '" + std::string(spec) + "' must look like feature:target:effect");
    }
    PlantedEffect e;
    e.feature = std::string(spec.substr(0, a));
    e.target = parse_engagement(spec.substr(a + 1, b - a - 1));
    std::string num(spec.substr(b + 1));
    try {
        std::size_t used = 0;
        e.effect = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
        throw ConfigError("planted effect size '" + num + "' is not a number");
    }
    FeatureVector probe;
    planted_feature_value(probe, e.feature);
    return e;
}

Lexicons load_lexicons(const LexiconPaths& paths)
{
    Lexicons lex;
    lex.valence = load_lexicon_file(paths.valence.string(), "valence", -4.0, 4.0);
    lex.subjectivity = load_lexicon_file(paths.subjectivity.string(), "subjectivity", 0.0, 1.0);
    lex.concreteness = load_lexicon_file(paths.concreteness.string(), "concreteness", 1.0, 5.0);
    lex.easy_words = load_word_list_file(paths.easy_words.string());
    return lex;
}

}  // namespace engage
