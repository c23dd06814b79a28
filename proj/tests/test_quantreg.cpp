#include "doctest.h"

#include "engage/error.hpp"
#include "engage/quantreg.hpp"

#include <Eigen/LU>
#include <random>

using namespace engage;

namespace {

DesignMatrix intercept_only(Eigen::Index n)
{
    return DesignMatrix({"intercept"}, Eigen::MatrixXd::Ones(n, 1));
}

DesignMatrix line_design(const Eigen::VectorXd& x)
{
    return DesignMatrix::with_intercept({"x"}, {x});
}

// Brute force over every p-row basis: the optimum of the linear program is
// attained at one of them.
double brute_force_loss(const DesignMatrix& X, const Eigen::VectorXd& y, double tau)
{
    const auto& A = X.values();
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    std::vector<bool> mask(static_cast<std::size_t>(n), false);
    std::fill(mask.begin(), mask.begin() + p, true);
    double best = std::numeric_limits<double>::infinity();
    do {
        Eigen::MatrixXd B(p, p);
        Eigen::VectorXd rhs(p);
        Eigen::Index k = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mask[static_cast<std::size_t>(i)]) {
                B.row(k) = A.row(i);
                rhs(k) = y(i);
                ++k;
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
        if (!lu.isInvertible()) continue;
        Eigen::VectorXd beta = lu.solve(rhs);
        best = std::min(best, pinball_loss(Eigen::VectorXd(y - A * beta), tau));
    } while (std::prev_permutation(mask.begin(), mask.end()));
    return best;
}

}  // namespace

TEST_SUITE("quantreg") {

TEST_CASE("pinball loss examples")
{
    std::vector<double> r = {2.0, -1.0};
    CHECK(pinball_loss(r, 0.9) == doctest::Approx(0.9 * 2.0 + 0.1 * 1.0));
    CHECK(pinball_loss(std::vector<double>{}, 0.5) == 0.0);
    Eigen::VectorXd e(3);
    e << 1, 0, -3;
    CHECK(pinball_loss(e, 0.25) == doctest::Approx(0.25 + 0.75 * 3));
}

TEST_CASE("intercept-only fits hit order statistics")
{
    Eigen::VectorXd y(5);
    y << 5, 1, 4, 2, 3;
    auto m = fit_quantile(intercept_only(5), y, 0.5);
    CHECK(m.coefficients(0) == 3.0);

    Eigen::VectorXd ten = Eigen::VectorXd::LinSpaced(10, 1, 10);
    SolverConfig exact;
    exact.method = SolverMethod::ExactSmall;
    auto e = fit_quantile(intercept_only(10), ten, 0.9, exact);
    CHECK(e.coefficients(0) == 9.0);
    auto i = fit_quantile(intercept_only(10), ten, 0.9);
    CHECK(i.report.final_loss == doctest::Approx(e.report.final_loss).epsilon(1e-9));
}

TEST_CASE("exact line is recovered")
{
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(20, 0, 19);
    Eigen::VectorXd y = (3.0 + 2.0 * x.array()).matrix();
    for (double tau : {0.1, 0.5, 0.9}) {
        auto m = fit_quantile(line_design(x), y, tau);
        CHECK(m.coefficients(0) == doctest::Approx(3.0).epsilon(1e-8));
        CHECK(m.coefficients(1) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(m.report.final_loss == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(m.report.converged);
    }
}

TEST_CASE("IRLS and EXACT_SMALL reach the brute-force optimum")
{
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    std::exponential_distribution<double> ex(0.5);
    SolverConfig exact;
    exact.method = SolverMethod::ExactSmall;
    for (int trial = 0; trial < 40; ++trial) {
        const Eigen::Index n = 9 + trial % 6;
        Eigen::VectorXd x(n), z(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i) = nd(rng);
            z(i) = std::round(3 * nd(rng));
            y(i) = 1.0 + x(i) - 0.5 * z(i) + ex(rng);
        }
        auto X = DesignMatrix::with_intercept({"x", "z"}, {x, z});
        double tau = trial % 2 ? 0.9 : 0.35;
        double oracle = brute_force_loss(X, y, tau);
        auto a = fit_quantile(X, y, tau);
        auto b = fit_quantile(X, y, tau, exact);
        CHECK(a.report.final_loss == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(b.report.final_loss == doctest::Approx(oracle).epsilon(1e-9));
        CHECK(pinball_loss(Eigen::VectorXd(y - predict(a, X)), tau) == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("equivariance")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> nd;
    const Eigen::Index n = 300;
    Eigen::VectorXd x(n), y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i) = nd(rng);
        y(i) = 2.0 + 0.7 * x(i) + std::exp(nd(rng));
    }
    auto X = line_design(x);
    const double tau = 0.75;
    auto base = fit_quantile(X, y, tau);

    // scale
    auto scaled = fit_quantile(X, Eigen::VectorXd(3.5 * y), tau);
    CHECK(scaled.report.final_loss == doctest::Approx(3.5 * base.report.final_loss).epsilon(1e-9));
    for (Eigen::Index j = 0; j < 2; ++j)
        CHECK(scaled.coefficients(j) == doctest::Approx(3.5 * base.coefficients(j)).epsilon(1e-6));

    // shift along the design
    Eigen::VectorXd shifted = y + X.values() * Eigen::Vector2d(1.0, -2.0);
    auto sh = fit_quantile(X, shifted, tau);
    CHECK(sh.report.final_loss == doctest::Approx(base.report.final_loss).epsilon(1e-9));
    CHECK(sh.coefficients(0) == doctest::Approx(base.coefficients(0) + 1.0).epsilon(1e-6));
    CHECK(sh.coefficients(1) == doctest::Approx(base.coefficients(1) - 2.0).epsilon(1e-6));

    // reflection swaps tau and 1 - tau
    auto refl = fit_quantile(X, Eigen::VectorXd(-y), 1.0 - tau);
    CHECK(refl.report.final_loss == doctest::Approx(base.report.final_loss).epsilon(1e-9));

    // the fraction of observations at or below the fit brackets tau
    Eigen::VectorXd r = y - predict(base, X);
    double below = 0, at_or_below = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (r(i) < -1e-9) ++below;
        if (r(i) <= 1e-9) ++at_or_below;
    }
    CHECK(below / n <= tau);
    CHECK(at_or_below / n >= tau);
}

TEST_CASE("errors")
{
    Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(6, 1, 6);
    CHECK_THROWS_AS(fit_quantile(intercept_only(6), y, 1.0), ConfigError);
    CHECK_THROWS_AS(fit_quantile(intercept_only(6), y, 0.0), ConfigError);
    CHECK_THROWS_AS(fit_quantile(intercept_only(5), y, 0.5), DataError);

    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, 0, 5);
    auto X = DesignMatrix::with_intercept({"x", "x2"}, {x, Eigen::VectorXd(2 * x)});
    CHECK_THROWS_AS(fit_quantile(X, y, 0.5), NumericalError);

    SolverConfig exact;
    exact.method = SolverMethod::ExactSmall;
    Eigen::VectorXd big = Eigen::VectorXd::LinSpaced(2000, 0, 1);
    auto B = DesignMatrix::with_intercept({"a", "b"}, {big, Eigen::VectorXd(big.array().square())});
    CHECK_THROWS_AS(fit_quantile(B, big, 0.5, exact), ConfigError);

    auto m = fit_quantile(line_design(x), y, 0.5);
    CHECK_THROWS_AS(predict(m, intercept_only(6)), DataError);

    CHECK(parse_solver_method("IRLS") == SolverMethod::IRLS);
    CHECK_THROWS_AS(parse_solver_method("simplex"), ConfigError);
    SolverConfig bad;
    bad.max_iter = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("iteration cap is reported, not thrown")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    Eigen::VectorXd x(200), y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        x(i) = nd(rng);
        y(i) = x(i) + nd(rng);
    }
    SolverConfig cfg;
    cfg.max_iter = 1;
    cfg.polish = false;
    auto m = fit_quantile(line_design(x), y, 0.5, cfg);
    CHECK_FALSE(m.report.converged);
    CHECK(m.report.iterations == 1);
}

}
