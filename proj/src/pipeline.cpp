#include "engage/pipeline.hpp"

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/text_util.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

namespace engage {

namespace fs = std::filesystem;

namespace {

std::ifstream open_artifact(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing input file: " + path.string());
    return in;
}

void emit(const fs::path& out_dir, const std::string& name, RunManifest& m,
          const std::function<void(std::ostream&)>& body)
{
    std::ostringstream buf;
    body(buf);
    std::ofstream out(out_dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + (out_dir / name).string());
    out << buf.str();
    if (!out) throw DataError("write failed for " + (out_dir / name).string());
    m.add_output(name);
}

std::vector<TweetRecord> read_corpus(const fs::path& path)
{
    auto in = open_artifact(path);
    auto parsed = parse_records(in);
    if (!parsed.errors.empty()) {
        const auto& e = parsed.errors.front();
        throw DataError(path.string() + " line " + std::to_string(e.line) + ": " + e.message);
    }
    return std::move(parsed.records);
}

std::vector<FeatureVector> read_features(const fs::path& dir)
{
    auto in = open_artifact(dir / "features.csv");
    return read_features_csv(in);
}

std::vector<UnexpectednessScores> read_scores(const fs::path& dir)
{
    auto in = open_artifact(dir / "scores.csv");
    return read_scores_csv(in);
}

void stage_ingest(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    if (cfg.input.empty()) throw ConfigError("input is not set (config key 'input' or --input)");
    auto in = open_artifact(cfg.input);
    auto parsed = parse_records(in);
    m.add_input(cfg.input);

    auto topics = load_topic_lexicon_file(cfg.lexicons.topics.string());
    m.add_input(cfg.lexicons.topics);
    const std::size_t read = parsed.records.size();
    auto corpus = apply_filters(std::move(parsed.records), cfg.pipeline.filter, &topics);
    auto stats = summarize(corpus);

    emit(dir, "corpus.jsonl", m, [&](std::ostream& o) { write_records(o, corpus.records); });
    emit(dir, "exclusions.csv", m, [&](std::ostream& o) { write_exclusions_csv(o, corpus); });
    emit(dir, "ingest_errors.csv", m, [&](std::ostream& o) {
        o << "line,message\n";
        for (const auto& e : parsed.errors) o << e.line << ',' << csv_escape(e.message) << '\n';
    });
    emit(dir, "corpus_summary.txt", m, [&](std::ostream& o) {
        o << "input_records=" << read + parsed.errors.size() << '\n';
        o << "malformed=" << parsed.errors.size() << '\n';
        o << "excluded=" << corpus.excluded_total() << '\n';
        write_summary(o, stats);
    });
}

void stage_featurize(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    auto records = read_corpus(dir / "corpus.jsonl");
    auto lex = load_lexicons(cfg.lexicons);
    auto topics = load_topic_lexicon_file(cfg.lexicons.topics.string());
    for (const auto& p : {cfg.lexicons.topics, cfg.lexicons.valence, cfg.lexicons.subjectivity,
                          cfg.lexicons.concreteness, cfg.lexicons.easy_words}) {
        m.add_input(p);
    }
    std::vector<FeatureVector> features;
    features.reserve(records.size());
    for (const auto& r : records) features.push_back(featurize(r, lex, tag(r.hashtags, topics), cfg.pipeline.sentiment));
    emit(dir, "features.csv", m, [&](std::ostream& o) { write_features_csv(o, features); });
}

void stage_score(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    auto records = read_corpus(dir / "corpus.jsonl");
    std::vector<EngagementCounts> counts;
    counts.reserve(records.size());
    for (const auto& r : records) counts.push_back(r.counts);
    auto baselines = fit_baselines(counts, cfg.pipeline);
    auto scores = score(records, baselines, cfg.pipeline);
    emit(dir, "baselines.csv", m, [&](std::ostream& o) { write_baselines_csv(o, baselines); });
    emit(dir, "scores.csv", m, [&](std::ostream& o) { write_scores_csv(o, scores); });
}

void stage_analyze(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    auto scores = read_scores(dir);
    auto features = read_features(dir);
    auto comparison = compare_distributions(scores);
    emit(dir, "distribution_tests.csv", m, [&](std::ostream& o) { write_distribution_tests_csv(o, comparison); });
    emit(dir, "distribution_summary.csv", m, [&](std::ostream& o) { write_distribution_summary_csv(o, comparison); });
    auto results = determinant_analysis(features, scores, cfg.pipeline);
    for (const auto& r : results) {
        emit(dir, coefficients_file_name(r), m, [&](std::ostream& o) { write_regression_csv(o, r.regression); });
    }
    emit(dir, "model_stats.csv", m, [&](std::ostream& o) { write_model_stats_csv(o, results); });
}

void stage_cv(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    auto scores = read_scores(dir);
    auto features = read_features(dir);
    auto reports = cv_analysis(features, scores, cfg.pipeline);
    for (auto t : kEngagementTypes) {
        emit(dir, "cv_" + std::string(engagement_name(t)) + ".csv", m,
             [&](std::ostream& o) { write_cv_csv(o, reports[static_cast<std::size_t>(t)]); });
    }
}

// --- report --------------------------------------------------------------

using Table = std::vector<std::vector<std::string>>;

Table read_table(const fs::path& path)
{
    auto in = open_artifact(path);
    Table t;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) t.push_back(parse_csv_line(line));
    }
    return t;
}

std::string short_number(const std::string& s)
{
    if (s.empty()) return s;
    try {
        double v = parse_double(s);
        if (v == std::floor(v) && std::abs(v) < 1e9) return s;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        return buf;
    } catch (const DataError&) {
        return s;
    }
}

void print_table(std::ostream& o, const Table& t, const std::vector<std::size_t>& cols)
{
    std::vector<std::size_t> width(cols.size(), 0);
    Table cells;
    for (std::size_t r = 0; r < t.size(); ++r) {
        std::vector<std::string> row;
        for (std::size_t c = 0; c < cols.size(); ++c) {
            std::string v = cols[c] < t[r].size() ? t[r][cols[c]] : "";
            if (r > 0) v = short_number(v);
            width[c] = std::max(width[c], utf8_length(v));
            row.push_back(std::move(v));
        }
        cells.push_back(std::move(row));
    }
    for (const auto& row : cells) {
        std::string line = "  ";
        for (std::size_t c = 0; c < row.size(); ++c) {
            line += row[c];
            if (c + 1 < row.size()) line += std::string(width[c] - utf8_length(row[c]) + 2, ' ');
        }
        o << line << '\n';
    }
}

std::vector<std::size_t> all_columns(const Table& t)
{
    std::vector<std::size_t> c(t.empty() ? 0 : t.front().size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = i;
    return c;
}

void heading(std::ostream& o, const std::string& title)
{
    o << '\n' << title << '\n' << std::string(title.size(), '-') << '\n';
}

void stage_report(const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    const auto& p = cfg.pipeline;
    auto panels = analysis_panels(p);

    // Read everything first so a missing artifact fails before writing.
    std::string summary;
    {
        auto in = open_artifact(dir / "corpus_summary.txt");
        std::ostringstream s;
        s << in.rdbuf();
        summary = s.str();
    }
    auto exclusions = read_table(dir / "exclusions.csv");
    auto baselines = read_table(dir / "baselines.csv");
    auto dist_summary = read_table(dir / "distribution_summary.csv");
    auto dist_tests = read_table(dir / "distribution_tests.csv");
    auto model_stats = read_table(dir / "model_stats.csv");
    std::vector<std::pair<std::string, Table>> coefficient_tables;
    for (auto t : kEngagementTypes) {
        DeterminantResult probe;
        probe.target = t;
        probe.variant = OlsVariant::Linear;
        probe.panel = panels.front().name;
        if (std::find(p.ols_variants.begin(), p.ols_variants.end(), OlsVariant::Linear) == p.ols_variants.end()) {
            probe.variant = p.ols_variants.front();
        }
        auto name = coefficients_file_name(probe);
        coefficient_tables.emplace_back(name, read_table(dir / name));
    }
    std::vector<std::pair<std::string, Table>> cv_tables;
    for (auto t : kEngagementTypes) {
        auto name = "cv_" + std::string(engagement_name(t)) + ".csv";
        if (fs::exists(dir / name)) cv_tables.emplace_back(name, read_table(dir / name));
    }

    emit(dir, "report.txt", m, [&](std::ostream& o) {
        o << "Unexpectedness quotient analysis\n";
        o << "================================\n";

        heading(o, "Settings");
        o << "  tau: " << format_double(p.tau) << '\n';
        o << "  quantile scale: " << quantile_scale_name(p.quantile_scale) << '\n';
        o << "  prediction floor: " << format_double(p.prediction_floor) << '\n';
        o << "  quantile solver: " << solver_method_name(p.solver.method) << (p.solver.polish ? " with simplex polish" : "")
          << '\n';
        o << "  standard errors: HC1 (heteroskedasticity-consistent)\n";
        o << "  log1p-transformed regressors:";
        for (const auto& c : p.log_transform_columns) o << ' ' << c;
        o << (p.log_transform_columns.empty() ? " none\n" : "\n");
        o << "  dependent variable: natural log of the quotient\n";
        o << "  regression variants:";
        for (auto v : p.ols_variants) o << ' ' << ols_variant_name(v);
        o << '\n';
        o << "  panels: " << panels[0].name << " (every filtered record), " << panels[1].name
          << " (largest count >= " << panels[1].min_any << ")\n";
        o << "  cross-validation: k=" << p.cv_k << " seed=" << p.cv_seed << '\n';

        heading(o, "Corpus");
        std::istringstream lines(summary);
        for (std::string line; std::getline(lines, line);) o << "  " << line << '\n';
        o << "  exclusions by reason:\n";
        print_table(o, exclusions, all_columns(exclusions));

        heading(o, "Baseline quantile models");
        print_table(o, baselines, {0, 3, 4, 5, 6, 8});

        heading(o, "Distribution of log quotients");
        print_table(o, dist_summary, all_columns(dist_summary));
        o << "\n  Welch t-tests on log quotients:\n";
        print_table(o, dist_tests, all_columns(dist_tests));

        heading(o, "Determinant regressions");
        print_table(o, model_stats, {0, 1, 2, 3, 4, 5, 6, 7});
        for (const auto& [name, table] : coefficient_tables) {
            o << "\n  " << name << ":\n";
            print_table(o, table, {0, 1, 2, 6});
        }

        if (!cv_tables.empty()) {
            heading(o, "Coefficient stability (k-fold)");
            for (const auto& [name, table] : cv_tables) {
                o << "\n  " << name << ":\n";
                print_table(o, table, {0, 1, 2});
            }
        }

        heading(o, "Output correspondence");
        o << "  baselines.csv: conditional-quantile baselines, each count on the other two\n";
        o << "  scores.csv: per-record observed counts, floored predictions and quotients\n";
        o << "  distribution_summary.csv, distribution_tests.csv: quotient distributions by\n"
             "    engagement type and pairwise Welch tests\n";
        o << "  coefficients_<target>_<variant>_" << panels[0].name
          << ".csv: log-quotient determinants on every filtered record\n";
        o << "  coefficients_<target>_<variant>_" << panels[1].name << ".csv: the same on records with a count >= "
          << panels[1].min_any << '\n';
        o << "  model_stats.csv: R-squared, F statistic and log-likelihood per regression\n";
        o << "  cv_<target>.csv: fold-by-fold coefficients of the linear all-record models\n";
        o << "  Values describe the supplied corpus only. Synthetic or sampled corpora are not\n"
             "  expected to reproduce coefficients estimated on other data.\n";
    });
}

using StageFn = void (*)(const RunConfig&, const fs::path&, RunManifest&);

StageFn stage_fn(std::string_view stage)
{
    if (stage == "ingest") return stage_ingest;
    if (stage == "featurize") return stage_featurize;
    if (stage == "score") return stage_score;
    if (stage == "analyze") return stage_analyze;
    if (stage == "cv") return stage_cv;
    if (stage == "report") return stage_report;
    throw ConfigError("unknown stage '" + std::string(stage) + "'");
}

void timed(std::string_view stage, const RunConfig& cfg, const fs::path& dir, RunManifest& m)
{
    auto fn = stage_fn(stage);
    auto t0 = std::chrono::steady_clock::now();
    fn(cfg, dir, m);
    m.add_timing(std::string(stage), std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

void prepare(const RunConfig& cfg, const fs::path& dir)
{
    cfg.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

RunManifest run_stage(std::string_view stage, const RunConfig& cfg, const fs::path& out_dir)
{
    stage_fn(stage);
    prepare(cfg, out_dir);
    auto m = open_manifest(out_dir, to_json(cfg));
    timed(stage, cfg, out_dir, m);
    write_manifest(out_dir, m);
    return m;
}

RunManifest run_pipeline(const RunConfig& cfg, const fs::path& out_dir)
{
    prepare(cfg, out_dir);
    auto m = open_manifest(out_dir, to_json(cfg));
    for (auto s : kStages) timed(s, cfg, out_dir, m);
    write_manifest(out_dir, m);
    return m;
}

std::size_t write_synthetic_corpus(const RunConfig& cfg, const fs::path& path)
{
    cfg.validate();
    auto sc = cfg.synth;
    sc.type_noise[static_cast<std::size_t>(EngagementType::Comments)] *= cfg.comment_noise_scale;
    auto lex = load_lexicons(cfg.lexicons);
    auto topics = load_topic_lexicon_file(cfg.lexicons.topics.string());
    auto records = generate(sc, lex, topics);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    write_records(out, records);
    return records.size();
}

}  // namespace engage
