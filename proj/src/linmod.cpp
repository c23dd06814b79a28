#include "engage/linmod.hpp"

#include "engage/error.hpp"
#include "engage/stats.hpp"
#include "engage/text_util.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace engage {

namespace {

constexpr double kZ975 = 1.959963984540054;

std::span<const double> as_span(const Eigen::VectorXd& v)
{
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

OlsModel fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y)
{
    if (y.size() != X.rows()) throw DataError("response length does not match design rows");
    if (!y.allFinite()) throw DataError("response contains non-finite values");
    if (X.rows() <= X.cols()) {
        throw DataError("OLS needs more rows (" + std::to_string(X.rows()) + ") than columns (" +
                        std::to_string(X.cols()) + ")");
    }
    require_full_rank(X);

    OlsModel m;
    m.columns = X.names();
    m.coefficients = X.values().colPivHouseholderQr().solve(y);
    m.fitted = X.values() * m.coefficients;
    m.residuals = y - m.fitted;
    m.df_resid = X.rows() - X.cols();
    return m;
}

Eigen::VectorXd robust_se(const OlsModel& model, const DesignMatrix& X)
{
    const auto& A = X.values();
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    if (model.residuals.size() != n || model.coefficients.size() != p) {
        throw DataError("robust_se: model does not match design");
    }
    // With X = QR, (X'X)^-1 = R^-1 R^-T, and U = X R^-1 has orthonormal columns.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
    Eigen::MatrixXd R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
    Eigen::MatrixXd U = A * Rinv;
    Eigen::MatrixXd Ur = model.residuals.asDiagonal() * U;
    Eigen::MatrixXd cov = Rinv * (Ur.transpose() * Ur) * Rinv.transpose();
    cov *= static_cast<double>(n) / static_cast<double>(n - p);
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt();
}

ModelStats model_stats(const OlsModel& model, const Eigen::VectorXd& y)
{
    const auto n = static_cast<double>(y.size());
    const double ybar = y.mean();
    const double sst = (y.array() - ybar).square().sum();
    if (sst == 0.0) throw NumericalError("R-squared undefined: response has zero variance");
    const double ssr = model.residuals.squaredNorm();
    const auto p = static_cast<double>(model.coefficients.size());

    ModelStats s;
    s.r_squared = std::clamp(1.0 - ssr / sst, 0.0, 1.0);
    const double k = p - 1.0;
    if (k <= 0.0) {
        s.f_statistic = std::numeric_limits<double>::quiet_NaN();
    } else if (ssr == 0.0) {
        s.f_statistic = std::numeric_limits<double>::infinity();
    } else {
        s.f_statistic = ((sst - ssr) / k) / (ssr / (n - p));
    }
    if (ssr == 0.0) {
        s.log_likelihood = std::numeric_limits<double>::infinity();
    } else {
        s.log_likelihood = -0.5 * n * (std::log(2.0 * std::numbers::pi * ssr / n) + 1.0);
    }
    return s;
}

const TermEstimate& RegressionResult::term(std::string_view name) const
{
    for (const auto& t : terms) {
        if (t.term == name) return t;
    }
    throw DataError("no term '" + std::string(name) + "' in regression result");
}

double student_t_two_sided_p(double t, double df)
{
    if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

RegressionResult regress(const DesignMatrix& X, const Eigen::VectorXd& y)
{
    auto model = fit_ols(X, y);
    auto se = robust_se(model, X);
    auto stats = model_stats(model, y);

    RegressionResult r;
    r.n = X.rows();
    r.r_squared = stats.r_squared;
    r.f_statistic = stats.f_statistic;
    r.log_likelihood = stats.log_likelihood;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        TermEstimate t;
        t.term = X.names()[static_cast<std::size_t>(j)];
        t.estimate = model.coefficients(j);
        t.robust_se = se(j);
        t.ci_low = t.estimate - kZ975 * t.robust_se;
        t.ci_high = t.estimate + kZ975 * t.robust_se;
        if (t.robust_se > 0.0) {
            t.t_value = t.estimate / t.robust_se;
            t.p_value = student_t_two_sided_p(t.t_value, static_cast<double>(model.df_resid));
        } else {
            t.t_value = t.estimate == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), t.estimate);
            t.p_value = t.estimate == 0.0 ? 1.0 : 0.0;
        }
        r.terms.push_back(std::move(t));
    }
    return r;
}

void write_regression_csv(std::ostream& out, const RegressionResult& result)
{
    out << "term,estimate,robust_se,ci_low,ci_high,t,p\n";
    for (const auto& t : result.terms) {
        out << t.term << ',' << format_double(t.estimate) << ',' << format_double(t.robust_se) << ','
            << format_double(t.ci_low) << ',' << format_double(t.ci_high) << ',' << format_double(t.t_value) << ','
            << format_double(t.p_value) << '\n';
    }
}

Eigen::VectorXd standardize(const Eigen::VectorXd& column)
{
    if (column.size() < 2) return Eigen::VectorXd::Zero(column.size());
    double m = mean(as_span(column));
    double sd = std::sqrt(sample_variance(as_span(column)));
    if (!(sd > 0.0)) return Eigen::VectorXd::Zero(column.size());
    return (column.array() - m) / sd;
}

DesignMatrix add_quadratic_terms(DesignMatrix X, const std::vector<std::string>& columns)
{
    for (const auto& name : columns) {
        auto col = X.column(name);
        X.append(name + "_sq", col.cwiseProduct(col));
    }
    return X;
}

DesignMatrix add_interactions(DesignMatrix X, const std::vector<std::string>& topic_columns,
                              const std::vector<std::string>& feature_columns)
{
    for (const auto& f : feature_columns) X.index_of(f);
    for (const auto& t : topic_columns) {
        auto tc = X.column(t);
        for (const auto& f : feature_columns) X.append(t + ":" + f, tc.cwiseProduct(X.column(f)));
    }
    return X;
}

double CvReport::average_relative_std(const std::vector<std::string>& names) const
{
    if (names.empty()) throw DataError("no columns to average");
    double s = 0.0;
    for (const auto& n : names) {
        auto it = std::find(columns.begin(), columns.end(), n);
        if (it == columns.end()) throw DataError("cv report has no column '" + n + "'");
        s += relative_std(it - columns.begin());
    }
    return s / static_cast<double>(names.size());
}

CvReport kfold_cv(const DesignMatrix& X, const Eigen::VectorXd& y, int k, std::uint64_t seed)
{
    if (k < 2) throw ConfigError("k must be >= 2");
    const Eigen::Index n = X.rows();
    if (n < 2 * static_cast<Eigen::Index>(k)) {
        throw DataError("cross-validation needs n >= 2k (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    CvReport rep;
    rep.k = k;
    rep.seed = seed;
    rep.columns = X.names();
    for (int f = 0; f < k; ++f) {
        auto lo = static_cast<std::size_t>(n * f / k);
        auto hi = static_cast<std::size_t>(n * (f + 1) / k);
        std::vector<Eigen::Index> held(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                       order.begin() + static_cast<std::ptrdiff_t>(hi));
        std::sort(held.begin(), held.end());
        std::vector<char> is_held(static_cast<std::size_t>(n), 0);
        for (auto i : held) is_held[static_cast<std::size_t>(i)] = 1;
        std::vector<Eigen::Index> train;
        train.reserve(static_cast<std::size_t>(n) - held.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!is_held[static_cast<std::size_t>(i)]) train.push_back(i);
        }
        Eigen::VectorXd ytrain(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) ytrain(static_cast<Eigen::Index>(i)) = y(train[i]);
        rep.fold_coefficients.push_back(fit_ols(X.select_rows(train), ytrain).coefficients);
        rep.folds.push_back(std::move(held));
    }

    const Eigen::Index p = X.cols();
    rep.mean = Eigen::VectorXd::Zero(p);
    rep.relative_std = Eigen::VectorXd::Zero(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        std::vector<double> vals;
        for (const auto& c : rep.fold_coefficients) vals.push_back(c(j));
        double m = mean(vals);
        double sd = std::sqrt(sample_variance(vals));
        rep.mean(j) = m;
        if (sd == 0.0) {
            rep.relative_std(j) = 0.0;
        } else {
            rep.relative_std(j) = m == 0.0 ? std::numeric_limits<double>::infinity() : sd / std::abs(m);
        }
    }
    return rep;
}

void write_cv_csv(std::ostream& out, const CvReport& report)
{
    out << "term,mean,relative_std";
    for (int f = 0; f < report.k; ++f) out << ",fold" << f + 1;
    out << '\n';
    for (std::size_t j = 0; j < report.columns.size(); ++j) {
        auto jj = static_cast<Eigen::Index>(j);
        out << report.columns[j] << ',' << format_double(report.mean(jj)) << ','
            << format_double(report.relative_std(jj));
        for (const auto& c : report.fold_coefficients) out << ',' << format_double(c(jj));
        out << '\n';
    }
}

WelchResult welch_ttest(std::span<const double> a, std::span<const double> b)
{
    if (a.size() < 2 || b.size() < 2) throw NumericalError("t-test needs at least two values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = sample_variance(a) / na;
    const double vb = sample_variance(b) / nb;
    if (va + vb == 0.0) throw NumericalError("t-test undefined: both samples have zero variance");

    WelchResult r;
    r.t = (mean(a) - mean(b)) / std::sqrt(va + vb);
    r.df = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

}  // namespace engage
