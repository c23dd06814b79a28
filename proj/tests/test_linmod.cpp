#include "doctest.h"

#include "engage/error.hpp"
#include "engage/linmod.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace engage;

namespace {

struct Sample {
    DesignMatrix X;
    Eigen::VectorXd y;
};

Sample random_sample(std::uint64_t seed, Eigen::Index n)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Eigen::VectorXd a(n), b(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        a(i) = nd(rng);
        b(i) = nd(rng) + 0.3 * a(i);
        // heteroskedastic noise so HC1 differs from the classical SE
        y(i) = 1.0 + 2.0 * a(i) - b(i) + (1.0 + std::abs(a(i))) * nd(rng);
    }
    return {DesignMatrix::with_intercept({"a", "b"}, {a, b}), y};
}

Eigen::VectorXd normal_equations(const DesignMatrix& X, const Eigen::VectorXd& y)
{
    const auto& A = X.values();
    return (A.transpose() * A).ldlt().solve(A.transpose() * y);
}

Eigen::VectorXd sandwich_hc1(const DesignMatrix& X, const Eigen::VectorXd& r)
{
    const auto& A = X.values();
    const double n = static_cast<double>(A.rows());
    const double p = static_cast<double>(A.cols());
    Eigen::MatrixXd bread = (A.transpose() * A).inverse();
    Eigen::MatrixXd meat = A.transpose() * r.array().square().matrix().asDiagonal() * A;
    Eigen::MatrixXd v = bread * meat * bread * (n / (n - p));
    return v.diagonal().cwiseSqrt();
}

}  // namespace

TEST_SUITE("linmod") {

TEST_CASE("OLS matches the normal equations")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = random_sample(seed, 60);
        auto m = fit_ols(s.X, s.y);
        Eigen::VectorXd beta = normal_equations(s.X, s.y);
        for (Eigen::Index j = 0; j < beta.size(); ++j)
            CHECK(m.coefficients(j) == doctest::Approx(beta(j)).epsilon(1e-10));
        CHECK(m.df_resid == 57);
        CHECK((m.fitted + m.residuals - s.y).cwiseAbs().maxCoeff() < 1e-12);
        // residuals orthogonal to every column
        CHECK((s.X.values().transpose() * m.residuals).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("HC1 standard errors")
{
    // Hand case: x = (0, 1, 2, 3), y = (0, 2, 1, 3). beta = (0.3, 0.8),
    // r = (-0.3, 0.9, -0.9, 0.3), (X'X)^-1 = [[0.7, -0.3], [-0.3, 0.2]].
    Eigen::VectorXd x(4), y(4);
    x << 0, 1, 2, 3;
    y << 0, 2, 1, 3;
    auto X = DesignMatrix::with_intercept({"x"}, {x});
    auto m = fit_ols(X, y);
    CHECK(m.coefficients(0) == doctest::Approx(0.3));
    CHECK(m.coefficients(1) == doctest::Approx(0.8));
    auto se = robust_se(m, X);
    // meat = sum r_i^2 [1 x_i; x_i x_i^2] = [[1.8, 2.7], [2.7, 4.86]]
    Eigen::Matrix2d bread, meat;
    bread << 0.7, -0.3, -0.3, 0.2;
    meat << 1.8, 2.7, 2.7, 4.86;
    Eigen::Matrix2d v = bread * meat * bread * 2.0;
    CHECK(se(0) == doctest::Approx(std::sqrt(v(0, 0))).epsilon(1e-12));
    CHECK(se(1) == doctest::Approx(std::sqrt(v(1, 1))).epsilon(1e-12));

    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = random_sample(seed, 80);
        auto fit = fit_ols(s.X, s.y);
        Eigen::VectorXd oracle = sandwich_hc1(s.X, fit.residuals);
        Eigen::VectorXd got = robust_se(fit, s.X);
        for (Eigen::Index j = 0; j < got.size(); ++j) CHECK(got(j) == doctest::Approx(oracle(j)).epsilon(1e-9));
    }
}

TEST_CASE("duplicating every row keeps estimates and shrinks HC1 by a fixed factor")
{
    auto s = random_sample(99, 50);
    const Eigen::Index n = 50, p = 3;
    Eigen::MatrixXd A2(2 * n, p);
    A2 << s.X.values(), s.X.values();
    Eigen::VectorXd y2(2 * n);
    y2 << s.y, s.y;
    DesignMatrix X2(s.X.names(), A2);
    auto m1 = fit_ols(s.X, s.y);
    auto m2 = fit_ols(X2, y2);
    auto se1 = robust_se(m1, s.X);
    auto se2 = robust_se(m2, X2);
    const double factor = std::sqrt(static_cast<double>(n - p) / static_cast<double>(2 * n - p));
    for (Eigen::Index j = 0; j < p; ++j) {
        CHECK(m2.coefficients(j) == doctest::Approx(m1.coefficients(j)).epsilon(1e-10));
        CHECK(se2(j) == doctest::Approx(se1(j) * factor).epsilon(1e-9));
    }
}

TEST_CASE("model statistics")
{
    auto s = random_sample(7, 40);
    auto m = fit_ols(s.X, s.y);
    auto st = model_stats(m, s.y);
    const double n = 40, k = 3;
    double ssr = m.residuals.squaredNorm();
    double sst = (s.y.array() - s.y.mean()).square().sum();
    double r2 = 1.0 - ssr / sst;
    CHECK(st.r_squared == doctest::Approx(r2).epsilon(1e-12));
    CHECK(st.f_statistic == doctest::Approx((r2 / (k - 1)) / ((1 - r2) / (n - k))).epsilon(1e-10));
    CHECK(st.log_likelihood ==
          doctest::Approx(-n / 2.0 * (std::log(2.0 * std::numbers::pi * ssr / n) + 1.0)).epsilon(1e-12));
    CHECK_THROWS_AS(model_stats(m, Eigen::VectorXd::Constant(40, 2.0)), NumericalError);
}

TEST_CASE("regress assembles terms")
{
    auto s = random_sample(3, 100);
    auto r = regress(s.X, s.y);
    REQUIRE(r.terms.size() == 3);
    CHECK(r.n == 100);
    CHECK(r.se_flavor == "HC1");
    for (const auto& t : r.terms) {
        CHECK(t.t_value == doctest::Approx(t.estimate / t.robust_se));
        CHECK(t.ci_low == doctest::Approx(t.estimate - 1.96 * t.robust_se));
        CHECK(t.ci_high == doctest::Approx(t.estimate + 1.96 * t.robust_se));
        CHECK(t.p_value == doctest::Approx(student_t_two_sided_p(t.t_value, 97.0)));
    }
    CHECK(r.term("a").estimate > 1.0);
    CHECK_THROWS_AS(r.term("nope"), DataError);

    std::ostringstream out;
    write_regression_csv(out, r);
    CHECK(out.str().rfind("term,estimate,robust_se,ci_low,ci_high,t,p\nintercept,", 0) == 0);
}

TEST_CASE("student t tail probabilities")
{
    // tabulated two-sided 5% critical values
    CHECK(student_t_two_sided_p(2.228138851986, 10) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(student_t_two_sided_p(-12.7062047361747, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(student_t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("welch test")
{
    std::vector<double> a = {1, 2, 3, 4};
    std::vector<double> b = {2, 4, 6, 8, 10};
    auto w = welch_ttest(a, b);
    // means 2.5 and 6, variances 5/3 and 10
    double va = (5.0 / 3.0) / 4.0, vb = 10.0 / 5.0;
    CHECK(w.t == doctest::Approx(-3.5 / std::sqrt(va + vb)).epsilon(1e-12));
    CHECK(w.df == doctest::Approx((va + vb) * (va + vb) / (va * va / 3.0 + vb * vb / 4.0)).epsilon(1e-12));
    CHECK(w.p == doctest::Approx(student_t_two_sided_p(w.t, w.df)));
    CHECK(w.p > 0.05);
    CHECK(w.p < 0.1);

    auto same = welch_ttest(a, a);
    CHECK(same.t == 0.0);
    CHECK(same.p == doctest::Approx(1.0));
    auto swapped = welch_ttest(b, a);
    CHECK(swapped.t == doctest::Approx(-w.t));

    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(welch_ttest(one, a), NumericalError);
    std::vector<double> c1 = {2, 2, 2}, c2 = {3, 3};
    CHECK_THROWS_AS(welch_ttest(c1, c2), NumericalError);
}

TEST_CASE("standardize")
{
    Eigen::VectorXd x(4);
    x << 1, 2, 3, 10;
    auto z = standardize(x);
    CHECK(z.mean() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((z.array().square().sum() / 3.0) == doctest::Approx(1.0));
    CHECK(standardize(Eigen::VectorXd::Constant(4, 7.0)).isZero());
}

TEST_CASE("quadratic and interaction terms")
{
    Eigen::VectorXd a(3), t(3);
    a << 1, 2, 3;
    t << 0, 1, 1;
    auto X = DesignMatrix::with_intercept({"a", "Sports"}, {a, t});
    auto q = add_quadratic_terms(X, {"a"});
    CHECK(q.cols() == 4);
    CHECK(q.column("a_sq") == Eigen::Vector3d(1, 4, 9));
    CHECK_THROWS_AS(add_quadratic_terms(q, {"a"}), DataError);
    CHECK_THROWS_AS(add_quadratic_terms(X, {"missing"}), DataError);

    auto i = add_interactions(X, {"Sports"}, {"a"});
    CHECK(i.column("Sports:a") == Eigen::Vector3d(0, 2, 3));

    // the shipped layout: 11 topic indicators crossed with 5 features
    const Eigen::Index n = 30;
    std::vector<std::string> names, topics, feats = {"f1", "f2", "f3", "f4", "f5"};
    std::vector<Eigen::VectorXd> cols;
    for (int k = 0; k < 11; ++k) {
        topics.push_back("t" + std::to_string(k));
        names.push_back(topics.back());
        cols.push_back(Eigen::VectorXd::Random(n));
    }
    for (const auto& f : feats) {
        names.push_back(f);
        cols.push_back(Eigen::VectorXd::Random(n));
    }
    auto big = DesignMatrix::with_intercept(names, cols);
    auto crossed = add_interactions(big, topics, feats);
    CHECK(crossed.cols() - big.cols() == 55);
}

TEST_CASE("k-fold cross-validation")
{
    auto s = random_sample(11, 103);
    auto r = kfold_cv(s.X, s.y, 10, 42);
    CHECK(r.k == 10);
    REQUIRE(r.folds.size() == 10);
    REQUIRE(r.fold_coefficients.size() == 10);
    std::set<Eigen::Index> seen;
    std::size_t lo = 1000, hi = 0;
    for (const auto& f : r.folds) {
        lo = std::min(lo, f.size());
        hi = std::max(hi, f.size());
        CHECK(std::is_sorted(f.begin(), f.end()));
        seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == 103);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 102);
    CHECK(hi - lo <= 1);

    // fold fits match a direct fit on the complement
    std::vector<Eigen::Index> keep;
    std::set<Eigen::Index> held(r.folds[3].begin(), r.folds[3].end());
    for (Eigen::Index i = 0; i < 103; ++i)
        if (!held.count(i)) keep.push_back(i);
    Eigen::VectorXd yk(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) yk(static_cast<Eigen::Index>(i)) = s.y(keep[i]);
    Eigen::VectorXd direct = normal_equations(s.X.select_rows(keep), yk);
    for (Eigen::Index j = 0; j < 3; ++j)
        CHECK(r.fold_coefficients[3](j) == doctest::Approx(direct(j)).epsilon(1e-9));

    auto again = kfold_cv(s.X, s.y, 10, 42);
    CHECK(again.folds == r.folds);
    CHECK(again.relative_std == r.relative_std);
    auto other = kfold_cv(s.X, s.y, 10, 43);
    CHECK(other.folds != r.folds);

    CHECK(r.average_relative_std({"a", "b"}) ==
          doctest::Approx((r.relative_std(1) + r.relative_std(2)) / 2.0));

    CHECK_THROWS_AS(kfold_cv(s.X, s.y, 1, 1), ConfigError);
    auto small = random_sample(1, 15);
    CHECK_THROWS_AS(kfold_cv(small.X, small.y, 10, 1), DataError);
}

TEST_CASE("exact data gives zero fold variation")
{
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(50, -2, 3);
    Eigen::VectorXd y = (1.0 + 4.0 * x.array()).matrix();
    auto r = kfold_cv(DesignMatrix::with_intercept({"x"}, {x}), y, 5, 9);
    CHECK(r.relative_std(1) < 1e-10);
    CHECK(r.mean(1) == doctest::Approx(4.0));
}

}
