#pragma once

#include "engage/design.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace engage {

struct OlsModel {
    std::vector<std::string> columns;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted;
    Eigen::VectorXd residuals;  // y - fitted
    Eigen::Index df_resid = 0;
};

/// Least squares through a column-pivoted QR. Requires full column rank and
/// more rows than columns; otherwise throws NumericalError / DataError.
OlsModel fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y);

/// HC1 sandwich standard errors:
/// sqrt(diag((X'X)^-1 X' diag(r^2) X (X'X)^-1) * n / (n - p)).
Eigen::VectorXd robust_se(const OlsModel& model, const DesignMatrix& X);

struct ModelStats {
    double r_squared = 0.0;
    double f_statistic = 0.0;   // joint test of every non-intercept coefficient
    double log_likelihood = 0.0;  // Gaussian, MLE variance SSR/n
};

/// Throws NumericalError when y has zero variance.
ModelStats model_stats(const OlsModel& model, const Eigen::VectorXd& y);

struct TermEstimate {
    std::string term;
    double estimate = 0.0;
    double robust_se = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double t_value = 0.0;
    double p_value = 1.0;
};

struct RegressionResult {
    std::vector<TermEstimate> terms;
    double r_squared = 0.0;
    double f_statistic = 0.0;
    double log_likelihood = 0.0;
    Eigen::Index n = 0;
    std::string se_flavor = "HC1";

    const TermEstimate& term(std::string_view name) const;  // throws DataError
};

/// fit_ols + robust_se + model_stats. CIs are estimate +/- 1.96 SE; p-values
/// are two-sided from Student t with the residual degrees of freedom.
RegressionResult regress(const DesignMatrix& X, const Eigen::VectorXd& y);

void write_regression_csv(std::ostream& out, const RegressionResult& result);

/// Two-sided tail probability of Student t.
double student_t_two_sided_p(double t, double df);

/// z-score with the sample standard deviation; a constant column maps to zeros.
Eigen::VectorXd standardize(const Eigen::VectorXd& column);

/// Appends "<name>_sq" for each named column.
DesignMatrix add_quadratic_terms(DesignMatrix X, const std::vector<std::string>& columns);

/// Appends "<topic>:<feature>" products for the full cross.
DesignMatrix add_interactions(DesignMatrix X, const std::vector<std::string>& topic_columns,
                              const std::vector<std::string>& feature_columns);

struct CvReport {
    int k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<Eigen::Index>> folds;  // held-out rows per fold, ascending
    std::vector<Eigen::VectorXd> fold_coefficients;  // fit on each fold's complement
    Eigen::VectorXd mean;
    Eigen::VectorXd relative_std;  // sample std / |mean| across folds

    /// Average relative_std over the named columns.
    double average_relative_std(const std::vector<std::string>& names) const;
};

/// Seeded shuffle, contiguous slicing into k folds, refit on each complement.
/// Throws ConfigError for k < 2 and DataError for n < 2k.
CvReport kfold_cv(const DesignMatrix& X, const Eigen::VectorXd& y, int k, std::uint64_t seed);

void write_cv_csv(std::ostream& out, const CvReport& report);

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

/// Unequal-variance two-sample t-test with Satterthwaite degrees of freedom.
/// Throws NumericalError for samples smaller than 2 or both variances zero.
WelchResult welch_ttest(std::span<const double> a, std::span<const double> b);

}  // namespace engage
