#pragma once

#include "engage/corpus.hpp"
#include "engage/linmod.hpp"
#include "engage/quantreg.hpp"
#include "engage/synth.hpp"
#include "engage/textfeat.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

enum class QuantileScale { Raw, Log1p };
enum class OlsVariant { Linear, Quadratic, Interactions };

std::string_view quantile_scale_name(QuantileScale s);  // "raw", "log1p"
QuantileScale parse_quantile_scale(std::string_view name);
std::string_view ols_variant_name(OlsVariant v);  // "linear", "quadratic", "interactions"
OlsVariant parse_ols_variant(std::string_view name);

struct PipelineConfig {
    double tau = 0.9;
    QuantileScale quantile_scale = QuantileScale::Raw;
    double prediction_floor = 1.0;
    FilterConfig filter;
    // Second panel keeps records whose largest count reaches this.
    std::int64_t robustness_min_any = 10;
    // Subset of {followers, listed, length} entered as log1p.
    std::vector<std::string> log_transform_columns = {"followers", "listed", "length"};
    std::vector<OlsVariant> ols_variants = {OlsVariant::Linear, OlsVariant::Quadratic, OlsVariant::Interactions};
    SolverConfig solver;
    SentimentConfig sentiment;
    int cv_k = 10;
    std::uint64_t cv_seed = 1;

    void validate() const;  // throws ConfigError naming the field
    bool log_transformed(std::string_view column) const;
};

struct Baselines {
    double tau = 0.9;
    QuantileScale scale = QuantileScale::Raw;
    std::array<QuantileModel, 3> models;  // likes, retweets, comments
};

/// Intercept plus the two other counts (on `scale`) for predicting `target`.
DesignMatrix baseline_design(std::span<const EngagementCounts> counts, EngagementType target, QuantileScale scale);
Eigen::VectorXd baseline_response(std::span<const EngagementCounts> counts, EngagementType target,
                                  QuantileScale scale);

/// Three quantile fits, one per engagement type. Needs n >= 10. When two
/// predictors are collinear (e.g. identical columns) the later one is held at
/// zero so every model still carries three coefficients.
Baselines fit_baselines(std::span<const EngagementCounts> counts, const PipelineConfig& cfg);

void write_baselines_csv(std::ostream& out, const Baselines& b);

struct UnexpectednessScores {
    std::string id;
    EngagementCounts observed;
    std::array<double, 3> predicted{};  // floored, count scale
    std::array<double, 3> e{};
    std::array<double, 3> log_e{};
};

/// Quotient of observed count over the floored baseline prediction.
UnexpectednessScores score_one(std::string id, const EngagementCounts& counts, const Baselines& b,
                               double prediction_floor);
std::vector<UnexpectednessScores> score(std::span<const TweetRecord> records, const Baselines& b,
                                        const PipelineConfig& cfg);

void write_scores_csv(std::ostream& out, std::span<const UnexpectednessScores> scores);
std::vector<UnexpectednessScores> read_scores_csv(std::istream& in);

struct PairTest {
    std::string pair;  // e.g. "comments_vs_likes"
    WelchResult welch;
    double mean_a = 0.0;
    double mean_b = 0.0;
};

struct TypeSummary {
    EngagementType type = EngagementType::Likes;
    double mean_log_e = 0.0;
    double mean_abs_log_e = 0.0;
    double sd_log_e = 0.0;
    double median_log_e = 0.0;
    double p10_log_e = 0.0;
    double p90_log_e = 0.0;
    double frac_above_one = 0.0;
};

struct DistributionComparison {
    std::array<PairTest, 3> tests;  // comments/likes, comments/retweets, likes/retweets
    std::array<TypeSummary, 3> summaries;
};

/// Welch tests on log-quotients. Throws NumericalError for fewer than two
/// records or degenerate samples.
DistributionComparison compare_distributions(std::span<const UnexpectednessScores> scores);

void write_distribution_tests_csv(std::ostream& out, const DistributionComparison& c);
void write_distribution_summary_csv(std::ostream& out, const DistributionComparison& c);

struct Panel {
    std::string name;
    std::int64_t min_any = 0;  // 0: every record
};

std::vector<Panel> analysis_panels(const PipelineConfig& cfg);

struct DeterminantDesign {
    DesignMatrix X;
    std::vector<std::string> dropped;  // constant columns removed
};

/// Standardized design over `rows` of `features`.
DeterminantDesign determinant_design(std::span<const FeatureVector> features, const std::vector<Eigen::Index>& rows,
                                     OlsVariant variant, const PipelineConfig& cfg);

struct DeterminantResult {
    EngagementType target = EngagementType::Likes;
    OlsVariant variant = OlsVariant::Linear;
    std::string panel;
    std::vector<std::string> dropped;
    RegressionResult regression;
};

/// One regression per target x configured variant x panel, in that nesting
/// order. Throws DataError unless features and scores carry the same ids in
/// the same order.
std::vector<DeterminantResult> determinant_analysis(std::span<const FeatureVector> features,
                                                    std::span<const UnexpectednessScores> scores,
                                                    const PipelineConfig& cfg);

/// Log-quotient regression restricted to one target / variant / panel.
DeterminantResult determinant_regression(std::span<const FeatureVector> features,
                                         std::span<const UnexpectednessScores> scores, EngagementType target,
                                         OlsVariant variant, const Panel& panel, const PipelineConfig& cfg);

/// k-fold coefficient stability of the linear, all-records regression per target.
std::array<CvReport, 3> cv_analysis(std::span<const FeatureVector> features,
                                    std::span<const UnexpectednessScores> scores, const PipelineConfig& cfg);

std::string coefficients_file_name(const DeterminantResult& r);
void write_model_stats_csv(std::ostream& out, std::span<const DeterminantResult> results);

}  // namespace engage
