#include "engage/unexpect.hpp"

#include "engage/csv.hpp"
#include "engage/error.hpp"
#include "engage/stats.hpp"
#include "engage/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <string>

namespace engage {

namespace {

constexpr std::array<std::string_view, 3> kLogTransformable = {"followers", "listed", "length"};

// Features that get squared / crossed with topics.
const std::vector<std::string> kShapeFeatures = {"readability", "sentiment", "subjectivity", "length",
                                                 "concreteness"};
const std::vector<std::string> kContinuous = {"readability", "concreteness", "length", "sentiment",
                                              "subjectivity", "followers", "listed"};

double scaled(std::int64_t count, QuantileScale s)
{
    auto x = static_cast<double>(count);
    return s == QuantileScale::Log1p ? std::log1p(x) : x;
}

std::array<EngagementType, 2> predictors_for(EngagementType target)
{
    switch (target) {
    case EngagementType::Likes: return {EngagementType::Retweets, EngagementType::Comments};
    case EngagementType::Retweets: return {EngagementType::Likes, EngagementType::Comments};
    case EngagementType::Comments: return {EngagementType::Likes, EngagementType::Retweets};
    }
    return {};
}

// Columns kept in order as long as each one raises the rank.
std::vector<std::string> dependent_columns(const DesignMatrix& X)
{
    std::vector<std::string> dropped;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Eigen::MatrixXd M(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
        for (std::size_t k = 0; k < kept.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = X.values().col(kept[k]);
        M.col(M.cols() - 1) = X.values().col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
        if (qr.rank() == M.cols()) {
            kept.push_back(j);
        } else {
            dropped.push_back(X.names()[static_cast<std::size_t>(j)]);
        }
    }
    return dropped;
}

QuantileModel fit_one(const DesignMatrix& X, const Eigen::VectorXd& y, const PipelineConfig& cfg)
{
    auto dropped = dependent_columns(X);
    if (dropped.empty()) return fit_quantile(X, y, cfg.tau, cfg.solver);
    auto reduced = fit_quantile(X.drop_columns(dropped), y, cfg.tau, cfg.solver);
    QuantileModel m = reduced;
    m.columns = X.names();
    m.coefficients = Eigen::VectorXd::Zero(X.cols());
    for (std::size_t k = 0; k < reduced.columns.size(); ++k) {
        m.coefficients(X.index_of(reduced.columns[k])) = reduced.coefficients(static_cast<Eigen::Index>(k));
    }
    return m;
}

std::string pair_name(EngagementType a, EngagementType b)
{
    return std::string(engagement_name(a)) + "_vs_" + std::string(engagement_name(b));
}

std::vector<double> log_e_column(std::span<const UnexpectednessScores> scores, EngagementType t)
{
    std::vector<double> v;
    v.reserve(scores.size());
    for (const auto& s : scores) v.push_back(s.log_e[static_cast<std::size_t>(t)]);
    return v;
}

void check_aligned(std::span<const FeatureVector> features, std::span<const UnexpectednessScores> scores)
{
    if (features.size() != scores.size()) {
        throw DataError("features (" + std::to_string(features.size()) + " rows) and scores (" +
                        std::to_string(scores.size()) + " rows) are not aligned");
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].id != scores[i].id) {
            throw DataError("features and scores disagree at row " + std::to_string(i + 1) + " ('" + features[i].id +
                            "' vs '" + scores[i].id + "')");
        }
    }
}

std::vector<Eigen::Index> panel_rows(std::span<const UnexpectednessScores> scores, const Panel& panel)
{
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].observed.max() >= panel.min_any) rows.push_back(static_cast<Eigen::Index>(i));
    }
    return rows;
}

}  // namespace

std::string_view quantile_scale_name(QuantileScale s)
{
    return s == QuantileScale::Raw ? "raw" : "log1p";
}

QuantileScale parse_quantile_scale(std::string_view name)
{
    if (name == "raw") return QuantileScale::Raw;
    if (name == "log1p") return QuantileScale::Log1p;
    throw ConfigError("quantile_scale must be raw or log1p, got '" + std::string(name) + "'");
}

std::string_view ols_variant_name(OlsVariant v)
{
    switch (v) {
    case OlsVariant::Linear: return "linear";
    case OlsVariant::Quadratic: return "quadratic";
    case OlsVariant::Interactions: return "interactions";
    }
    return "?";
}

OlsVariant parse_ols_variant(std::string_view name)
{
    for (auto v : {OlsVariant::Linear, OlsVariant::Quadratic, OlsVariant::Interactions}) {
        if (ols_variant_name(v) == name) return v;
    }
    throw ConfigError("ols_variants: unknown variant '" + std::string(name) + "'");
}

void PipelineConfig::validate() const
{
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
    if (!(prediction_floor > 0.0) || !std::isfinite(prediction_floor)) {
        throw ConfigError("prediction_floor must be > 0");
    }
    if (robustness_min_any < 0) throw ConfigError("robustness_min_any must be >= 0");
    for (const auto& c : log_transform_columns) {
        if (std::find(kLogTransformable.begin(), kLogTransformable.end(), c) == kLogTransformable.end()) {
            throw ConfigError("log_transform_columns: unsupported column '" + c + "'");
        }
    }
    if (ols_variants.empty()) throw ConfigError("ols_variants must not be empty");
    if (cv_k < 2) throw ConfigError("cv.k must be >= 2");
    filter.validate();
    solver.validate();
    sentiment.validate();
}

bool PipelineConfig::log_transformed(std::string_view column) const
{
    return std::find(log_transform_columns.begin(), log_transform_columns.end(), column) !=
           log_transform_columns.end();
}

DesignMatrix baseline_design(std::span<const EngagementCounts> counts, EngagementType target, QuantileScale scale)
{
    auto preds = predictors_for(target);
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> cols;
    for (auto p : preds) {
        Eigen::VectorXd c(static_cast<Eigen::Index>(counts.size()));
        for (std::size_t i = 0; i < counts.size(); ++i) c(static_cast<Eigen::Index>(i)) = scaled(count_of(counts[i], p), scale);
        names.emplace_back(engagement_name(p));
        cols.push_back(std::move(c));
    }
    return DesignMatrix::with_intercept(names, cols);
}

Eigen::VectorXd baseline_response(std::span<const EngagementCounts> counts, EngagementType target,
                                  QuantileScale scale)
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(counts.size()));
    for (std::size_t i = 0; i < counts.size(); ++i) y(static_cast<Eigen::Index>(i)) = scaled(count_of(counts[i], target), scale);
    return y;
}

Baselines fit_baselines(std::span<const EngagementCounts> counts, const PipelineConfig& cfg)
{
    cfg.validate();
    if (counts.size() < 10) {
        throw DataError("baselines need at least 10 records, got " + std::to_string(counts.size()));
    }
    Baselines b;
    b.tau = cfg.tau;
    b.scale = cfg.quantile_scale;
    std::array<std::future<QuantileModel>, 3> jobs;
    for (auto t : kEngagementTypes) {
        jobs[static_cast<std::size_t>(t)] = std::async(std::launch::async, [&, t] {
            return fit_one(baseline_design(counts, t, cfg.quantile_scale),
                           baseline_response(counts, t, cfg.quantile_scale), cfg);
        });
    }
    for (std::size_t k = 0; k < 3; ++k) b.models[k] = jobs[k].get();
    return b;
}

void write_baselines_csv(std::ostream& out, const Baselines& b)
{
    out << "target,tau,scale,term,estimate,iterations,pivots,loss,converged\n";
    for (auto t : kEngagementTypes) {
        const auto& m = b.models[static_cast<std::size_t>(t)];
        for (std::size_t j = 0; j < m.columns.size(); ++j) {
            out << engagement_name(t) << ',' << format_double(b.tau) << ',' << quantile_scale_name(b.scale) << ','
                << m.columns[j] << ',' << format_double(m.coefficients(static_cast<Eigen::Index>(j))) << ','
                << m.report.iterations << ',' << m.report.pivots << ',' << format_double(m.report.final_loss) << ','
                << (m.report.converged ? 1 : 0) << '\n';
        }
    }
}

UnexpectednessScores score_one(std::string id, const EngagementCounts& counts, const Baselines& b,
                               double prediction_floor)
{
    UnexpectednessScores s;
    s.id = std::move(id);
    s.observed = counts;
    for (auto t : kEngagementTypes) {
        const auto k = static_cast<std::size_t>(t);
        const auto& c = b.models[k].coefficients;
        auto preds = predictors_for(t);
        double pred = c(0) + c(1) * scaled(count_of(counts, preds[0]), b.scale) +
                      c(2) * scaled(count_of(counts, preds[1]), b.scale);
        if (b.scale == QuantileScale::Log1p) pred = std::expm1(pred);
        const auto obs = static_cast<double>(count_of(counts, t));
        // Records tied with a basis row are interpolated exactly in exact
        // arithmetic; don't let round-off push them to either side of 1.
        if (std::abs(pred - obs) <= 1e-9 * (1.0 + obs)) pred = obs;
        if (!(pred >= prediction_floor)) pred = prediction_floor;  // NaN falls to the floor too
        s.predicted[k] = pred;
        s.e[k] = obs / pred;
        s.log_e[k] = std::log(s.e[k]);
    }
    return s;
}

std::vector<UnexpectednessScores> score(std::span<const TweetRecord> records, const Baselines& b,
                                        const PipelineConfig& cfg)
{
    std::vector<UnexpectednessScores> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(score_one(r.id, r.counts, b, cfg.prediction_floor));
    return out;
}

void write_scores_csv(std::ostream& out, std::span<const UnexpectednessScores> scores)
{
    out << "id,likes,retweets,comments,pred_likes,pred_retweets,pred_comments,e_likes,e_retweets,e_comments\n";
    for (const auto& s : scores) {
        out << csv_escape(s.id) << ',' << s.observed.likes << ',' << s.observed.retweets << ',' << s.observed.comments;
        for (double p : s.predicted) out << ',' << format_double(p);
        for (double e : s.e) out << ',' << format_double(e);
        out << '\n';
    }
}

std::vector<UnexpectednessScores> read_scores_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) throw DataError("scores.csv is empty");
    if (auto header = parse_csv_line(line); header.size() != 10 || header[0] != "id") {
        throw DataError("scores.csv has an unexpected header");
    }
    std::vector<UnexpectednessScores> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = parse_csv_line(line);
        if (f.size() != 10) throw DataError("scores.csv line " + std::to_string(lineno) + ": expected 10 fields");
        UnexpectednessScores s;
        s.id = f[0];
        auto as_count = [&](const std::string& v) {
            double d = parse_double(v);
            if (d != std::floor(d) || d < 0) {
                throw DataError("scores.csv line " + std::to_string(lineno) + ": bad count '" + v + "'");
            }
            return static_cast<std::int64_t>(d);
        };
        s.observed = {as_count(f[1]), as_count(f[2]), as_count(f[3])};
        for (std::size_t k = 0; k < 3; ++k) {
            s.predicted[k] = parse_double(f[4 + k]);
            s.e[k] = parse_double(f[7 + k]);
            s.log_e[k] = std::log(s.e[k]);
        }
        out.push_back(std::move(s));
    }
    return out;
}

DistributionComparison compare_distributions(std::span<const UnexpectednessScores> scores)
{
    if (scores.size() < 2) throw NumericalError("distribution comparison needs at least two scored records");
    std::array<std::vector<double>, 3> cols;
    for (auto t : kEngagementTypes) cols[static_cast<std::size_t>(t)] = log_e_column(scores, t);

    DistributionComparison c;
    constexpr std::array<std::pair<EngagementType, EngagementType>, 3> pairs = {{
        {EngagementType::Comments, EngagementType::Likes},
        {EngagementType::Comments, EngagementType::Retweets},
        {EngagementType::Likes, EngagementType::Retweets},
    }};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& a = cols[static_cast<std::size_t>(pairs[i].first)];
        const auto& b = cols[static_cast<std::size_t>(pairs[i].second)];
        c.tests[i].pair = pair_name(pairs[i].first, pairs[i].second);
        c.tests[i].welch = welch_ttest(a, b);
        c.tests[i].mean_a = mean(a);
        c.tests[i].mean_b = mean(b);
    }
    for (auto t : kEngagementTypes) {
        const auto& v = cols[static_cast<std::size_t>(t)];
        auto& s = c.summaries[static_cast<std::size_t>(t)];
        s.type = t;
        s.mean_log_e = mean(v);
        double abs_sum = 0.0;
        std::size_t above = 0;
        for (double x : v) {
            abs_sum += std::abs(x);
            if (x > 0.0) ++above;
        }
        s.mean_abs_log_e = abs_sum / static_cast<double>(v.size());
        s.sd_log_e = std::sqrt(sample_variance(v));
        s.median_log_e = quantile(v, 0.5);
        s.p10_log_e = quantile(v, 0.1);
        s.p90_log_e = quantile(v, 0.9);
        s.frac_above_one = static_cast<double>(above) / static_cast<double>(v.size());
    }
    return c;
}

void write_distribution_tests_csv(std::ostream& out, const DistributionComparison& c)
{
    out << "pair,t,df,p,mean_a,mean_b\n";
    for (const auto& t : c.tests) {
        out << t.pair << ',' << format_double(t.welch.t) << ',' << format_double(t.welch.df) << ','
            << format_double(t.welch.p) << ',' << format_double(t.mean_a) << ',' << format_double(t.mean_b) << '\n';
    }
}

void write_distribution_summary_csv(std::ostream& out, const DistributionComparison& c)
{
    out << "type,mean_log_e,mean_abs_log_e,sd_log_e,median_log_e,p10_log_e,p90_log_e,frac_e_above_1\n";
    for (const auto& s : c.summaries) {
        out << engagement_name(s.type) << ',' << format_double(s.mean_log_e) << ',' << format_double(s.mean_abs_log_e)
            << ',' << format_double(s.sd_log_e) << ',' << format_double(s.median_log_e) << ','
            << format_double(s.p10_log_e) << ',' << format_double(s.p90_log_e) << ','
            << format_double(s.frac_above_one) << '\n';
    }
}

std::vector<Panel> analysis_panels(const PipelineConfig& cfg)
{
    return {{"all", 0}, {"min_any_" + std::to_string(cfg.robustness_min_any), cfg.robustness_min_any}};
}

DeterminantDesign determinant_design(std::span<const FeatureVector> features, const std::vector<Eigen::Index>& rows,
                                     OlsVariant variant, const PipelineConfig& cfg)
{
    const auto n = static_cast<Eigen::Index>(rows.size());
    auto make = [&](auto&& value) {
        Eigen::VectorXd c(n);
        for (Eigen::Index i = 0; i < n; ++i) c(i) = value(features[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])]);
        return c;
    };

    double conc_sum = 0.0;
    std::size_t conc_n = 0;
    for (auto r : rows) {
        if (const auto& c = features[static_cast<std::size_t>(r)].complexity.concreteness) {
            conc_sum += *c;
            ++conc_n;
        }
    }
    const double conc_mean = conc_n ? conc_sum / static_cast<double>(conc_n) : 0.0;
    const bool log_len = cfg.log_transformed("length");
    const bool log_fol = cfg.log_transformed("followers");
    const bool log_lst = cfg.log_transformed("listed");

    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> cols;
    auto add = [&](std::string name, Eigen::VectorXd c) {
        if (std::find(kContinuous.begin(), kContinuous.end(), name) != kContinuous.end()) c = standardize(c);
        names.push_back(std::move(name));
        cols.push_back(std::move(c));
    };
    add("readability", make([](const FeatureVector& f) { return f.complexity.readability; }));
    add("concreteness", make([&](const FeatureVector& f) { return f.complexity.concreteness.value_or(conc_mean); }));
    add("concreteness_missing", make([](const FeatureVector& f) { return f.concreteness_missing() ? 1.0 : 0.0; }));
    add("length", make([&](const FeatureVector& f) {
            auto len = static_cast<double>(f.complexity.length);
            return log_len ? std::log1p(len) : len;
        }));
    add("has_link", make([](const FeatureVector& f) { return f.complexity.has_link ? 1.0 : 0.0; }));
    add("sentiment", make([](const FeatureVector& f) { return f.valence.sentiment; }));
    add("subjectivity", make([](const FeatureVector& f) { return f.valence.subjectivity; }));
    std::vector<std::string> topic_names;
    for (auto t : all_topics()) {
        if (t == Topic::Other) continue;  // reference category
        topic_names.emplace_back(topic_label(t));
        add(std::string(topic_label(t)), make([t](const FeatureVector& f) { return f.topics.has(t) ? 1.0 : 0.0; }));
    }
    add("followers", make([&](const FeatureVector& f) { return log_fol ? f.log_followers : std::expm1(f.log_followers); }));
    add("listed", make([&](const FeatureVector& f) { return log_lst ? f.log_listed : std::expm1(f.log_listed); }));
    add("verified", make([](const FeatureVector& f) { return f.verified ? 1.0 : 0.0; }));

    auto X = DesignMatrix::with_intercept(names, cols);
    if (variant == OlsVariant::Quadratic) X = add_quadratic_terms(std::move(X), kShapeFeatures);
    if (variant == OlsVariant::Interactions) X = add_interactions(std::move(X), topic_names, kShapeFeatures);

    DeterminantDesign d;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto& name = X.names()[static_cast<std::size_t>(j)];
        if (name == kInterceptName) continue;
        auto c = X.values().col(j);
        if (n == 0 || c.maxCoeff() == c.minCoeff()) d.dropped.push_back(name);
    }
    d.X = d.dropped.empty() ? std::move(X) : X.drop_columns(d.dropped);
    return d;
}

DeterminantResult determinant_regression(std::span<const FeatureVector> features,
                                         std::span<const UnexpectednessScores> scores, EngagementType target,
                                         OlsVariant variant, const Panel& panel, const PipelineConfig& cfg)
{
    check_aligned(features, scores);
    auto rows = panel_rows(scores, panel);
    auto design = determinant_design(features, rows, variant, cfg);
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = scores[static_cast<std::size_t>(rows[i])].log_e[static_cast<std::size_t>(target)];
    }
    DeterminantResult r;
    r.target = target;
    r.variant = variant;
    r.panel = panel.name;
    r.dropped = std::move(design.dropped);
    r.regression = regress(design.X, y);
    return r;
}

std::vector<DeterminantResult> determinant_analysis(std::span<const FeatureVector> features,
                                                    std::span<const UnexpectednessScores> scores,
                                                    const PipelineConfig& cfg)
{
    cfg.validate();
    check_aligned(features, scores);
    std::vector<DeterminantResult> out;
    auto panels = analysis_panels(cfg);
    for (auto t : kEngagementTypes) {
        for (auto v : cfg.ols_variants) {
            for (const auto& p : panels) out.push_back(determinant_regression(features, scores, t, v, p, cfg));
        }
    }
    return out;
}

std::array<CvReport, 3> cv_analysis(std::span<const FeatureVector> features,
                                    std::span<const UnexpectednessScores> scores, const PipelineConfig& cfg)
{
    cfg.validate();
    check_aligned(features, scores);
    std::vector<Eigen::Index> rows(scores.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<Eigen::Index>(i);
    auto design = determinant_design(features, rows, OlsVariant::Linear, cfg);
    std::array<CvReport, 3> out;
    for (auto t : kEngagementTypes) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(scores.size()));
        for (std::size_t i = 0; i < scores.size(); ++i) y(static_cast<Eigen::Index>(i)) = scores[i].log_e[static_cast<std::size_t>(t)];
        out[static_cast<std::size_t>(t)] = kfold_cv(design.X, y, cfg.cv_k, cfg.cv_seed);
    }
    return out;
}

std::string coefficients_file_name(const DeterminantResult& r)
{
    return "coefficients_" + std::string(engagement_name(r.target)) + "_" + std::string(ols_variant_name(r.variant)) +
           "_" + r.panel + ".csv";
}

void write_model_stats_csv(std::ostream& out, std::span<const DeterminantResult> results)
{
    out << "target,variant,panel,n,columns,r_squared,f_statistic,log_likelihood,se,dropped\n";
    for (const auto& r : results) {
        std::string dropped;
        for (const auto& d : r.dropped) dropped += (dropped.empty() ? "" : ";") + d;
        out << engagement_name(r.target) << ',' << ols_variant_name(r.variant) << ',' << r.panel << ','
            << r.regression.n << ',' << r.regression.terms.size() << ',' << format_double(r.regression.r_squared)
            << ',' << format_double(r.regression.f_statistic) << ',' << format_double(r.regression.log_likelihood)
            << ',' << r.regression.se_flavor << ',' << csv_escape(dropped) << '\n';
    }
}

}  // namespace engage
