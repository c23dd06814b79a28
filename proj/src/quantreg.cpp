#include "engage/quantreg.hpp"

#include "engage/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace engage {

namespace {

constexpr double kMaxExactCombinations = 2.0e6;

void check_inputs(const DesignMatrix& X, const Eigen::VectorXd& y, double tau)
{
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must be in (0, 1)");
    if (y.size() != X.rows()) throw DataError("response length does not match design rows");
    if (!y.allFinite()) throw DataError("response contains non-finite values");
    if (X.rows() < X.cols() + 1) {
        throw DataError("quantile fit needs at least " + std::to_string(X.cols() + 1) + " rows, got " +
                        std::to_string(X.rows()));
    }
}

double combinations(Eigen::Index n, Eigen::Index k)
{
    double c = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) c = c * static_cast<double>(n - i) / static_cast<double>(i + 1);
    return c;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

QuantileModel fit_exact_small(const DesignMatrix& X, const Eigen::VectorXd& y, double tau)
{
    const auto& A = X.values();
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    if (combinations(n, p) > kMaxExactCombinations) {
        throw ConfigError("EXACT_SMALL enumeration too large (n=" + std::to_string(n) + ", p=" + std::to_string(p) +
                          "); use IRLS");
    }

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    Eigen::MatrixXd basis(p, p);
    Eigen::VectorXd rhs(p);
    Eigen::VectorXd resid(n);

    std::optional<Eigen::VectorXd> best;
    double best_loss = 0.0;
    long evaluated = 0;

    while (true) {
        for (Eigen::Index k = 0; k < p; ++k) {
            basis.row(k) = A.row(idx[static_cast<std::size_t>(k)]);
            rhs(k) = y(idx[static_cast<std::size_t>(k)]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
        if (lu.isInvertible()) {
            Eigen::VectorXd b = lu.solve(rhs);
            resid.noalias() = y - A * b;
            double loss = pinball_loss(resid, tau);
            ++evaluated;
            double tie = 1e-11 * (1.0 + std::abs(best_loss));
            if (!best || loss < best_loss - tie || (std::abs(loss - best_loss) <= tie && lex_less(b, *best))) {
                if (!best || loss < best_loss) best_loss = loss;
                best = std::move(b);
            }
        }

        // next combination in lexicographic order
        Eigen::Index k = p - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == n - p + k) --k;
        if (k < 0) break;
        ++idx[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k + 1; j < p; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    if (!best) throw NumericalError("no nonsingular basic solution (rank-deficient design)");

    QuantileModel m;
    m.tau = tau;
    m.columns = X.names();
    m.coefficients = *best;
    m.report.iterations = static_cast<int>(std::min<long>(evaluated, std::numeric_limits<int>::max()));
    m.report.final_loss = pinball_loss(Eigen::VectorXd(y - A * m.coefficients), tau);
    m.report.converged = true;
    return m;
}

// Rows ordered by |residual|, greedily kept while linearly independent.
std::optional<std::vector<Eigen::Index>> nearest_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& resid)
{
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return std::abs(resid(a)) < std::abs(resid(b)); });

    std::vector<Eigen::Index> chosen;
    Eigen::MatrixXd ortho(p, p);
    for (auto i : order) {
        Eigen::VectorXd v = A.row(i).transpose();
        double norm0 = v.norm();
        if (norm0 == 0.0) continue;
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            auto q = ortho.col(static_cast<Eigen::Index>(k));
            v -= q.dot(v) * q;
        }
        if (v.norm() <= 1e-9 * norm0) continue;
        ortho.col(static_cast<Eigen::Index>(chosen.size())) = v.normalized();
        chosen.push_back(i);
        if (static_cast<Eigen::Index>(chosen.size()) == p) return chosen;
    }
    return std::nullopt;
}

struct PolishResult {
    Eigen::VectorXd coefficients;
    double loss = 0.0;
    int pivots = 0;
    bool optimal = false;
};

// Exact descent over basic solutions: from a basis, try every edge that frees
// one basis row (in both directions), take the steepest descending edge and
// walk it to the loss minimum along the ray, where a new row enters.
std::optional<PolishResult> simplex_polish(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, double tau,
                                           std::vector<Eigen::Index> basis, int max_pivots)
{
    const Eigen::Index n = A.rows();
    const Eigen::Index p = A.cols();
    const double zero_tol = 1e-12 * (1.0 + y.cwiseAbs().maxCoeff());

    Eigen::MatrixXd XB(p, p);
    Eigen::VectorXd yB(p);
    for (Eigen::Index k = 0; k < p; ++k) {
        XB.row(k) = A.row(basis[static_cast<std::size_t>(k)]);
        yB(k) = y(basis[static_cast<std::size_t>(k)]);
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(XB);
    PolishResult out;
    out.coefficients = lu.solve(yB);
    Eigen::VectorXd resid = y - A * out.coefficients;
    out.loss = pinball_loss(resid, tau);

    std::vector<char> in_basis(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<double, Eigen::Index>> breaks;
    breaks.reserve(static_cast<std::size_t>(n));

    for (int pivot = 0; pivot < max_pivots; ++pivot) {
        std::fill(in_basis.begin(), in_basis.end(), 0);
        for (auto i : basis) {
            in_basis[static_cast<std::size_t>(i)] = 1;
            resid(i) = 0.0;
        }
        for (Eigen::Index k = 0; k < p; ++k) XB.row(k) = A.row(basis[static_cast<std::size_t>(k)]);
        Eigen::MatrixXd XBinv = XB.inverse();
        if (!XBinv.allFinite()) return std::nullopt;
        Eigen::MatrixXd dirs = A * XBinv;  // column k: change of fitted values per unit move of basis row k

        double best_rel = -1e-10;
        Eigen::Index best_k = -1;
        double best_sign = 0.0;
        for (Eigen::Index k = 0; k < p; ++k) {
            for (double s : {1.0, -1.0}) {
                double slope = 0.0;
                double scale = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    double a = s * dirs(i, k);
                    if (in_basis[static_cast<std::size_t>(i)] && i != basis[static_cast<std::size_t>(k)]) continue;
                    if (a == 0.0) continue;
                    scale += std::abs(a);
                    double r = resid(i);
                    if (std::abs(r) <= zero_tol) {
                        slope += std::abs(a) * (a < 0 ? tau : 1.0 - tau);
                    } else if (r > 0) {
                        slope -= a * tau;
                    } else {
                        slope -= a * (tau - 1.0);
                    }
                }
                if (scale > 0.0 && slope / scale < best_rel) {
                    best_rel = slope / scale;
                    best_k = k;
                    best_sign = s;
                }
            }
        }
        if (best_k < 0) {
            out.optimal = true;
            return out;
        }

        // Recompute the chosen slope and walk breakpoints until it turns non-negative.
        double slope = 0.0;
        breaks.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            double a = best_sign * dirs(i, best_k);
            if (in_basis[static_cast<std::size_t>(i)] && i != basis[static_cast<std::size_t>(best_k)]) continue;
            if (a == 0.0) continue;
            double r = resid(i);
            if (std::abs(r) <= zero_tol) {
                slope += std::abs(a) * (a < 0 ? tau : 1.0 - tau);
            } else {
                slope -= r > 0 ? a * tau : a * (tau - 1.0);
                if ((r > 0) == (a > 0)) breaks.emplace_back(r / a, i);
            }
        }
        std::sort(breaks.begin(), breaks.end());
        std::optional<std::pair<double, Eigen::Index>> stop;
        for (const auto& [t, i] : breaks) {
            slope += std::abs(best_sign * dirs(i, best_k));
            if (slope >= 0.0) {
                stop = std::make_pair(t, i);
                break;
            }
        }
        if (!stop) return std::nullopt;

        Eigen::VectorXd step = best_sign * XBinv.col(best_k);
        Eigen::VectorXd next = out.coefficients + stop->first * step;
        auto next_basis = basis;
        next_basis[static_cast<std::size_t>(best_k)] = stop->second;
        for (Eigen::Index k = 0; k < p; ++k) {
            XB.row(k) = A.row(next_basis[static_cast<std::size_t>(k)]);
            yB(k) = y(next_basis[static_cast<std::size_t>(k)]);
        }
        // Re-solve on the new basis to keep round-off from accumulating.
        Eigen::FullPivLU<Eigen::MatrixXd> next_lu(XB);
        if (!next_lu.isInvertible()) return std::nullopt;
        next = next_lu.solve(yB);
        Eigen::VectorXd next_resid = y - A * next;
        double next_loss = pinball_loss(next_resid, tau);
        if (next_loss > out.loss * (1.0 + 1e-14) + 1e-300) {
            out.optimal = false;
            return out;
        }
        out.coefficients = std::move(next);
        out.loss = next_loss;
        resid = std::move(next_resid);
        basis = std::move(next_basis);
        ++out.pivots;
    }
    return out;
}

QuantileModel fit_irls(const DesignMatrix& X, const Eigen::VectorXd& y, double tau, const SolverConfig& cfg)
{
    const auto& A = X.values();
    const Eigen::Index n = A.rows();

    Eigen::VectorXd b = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd resid(n);
    Eigen::VectorXd sw(n);
    Eigen::VectorXd z(n);

    QuantileModel m;
    m.tau = tau;
    m.columns = X.names();

    for (int it = 1; it <= cfg.max_iter; ++it) {
        resid.noalias() = y - A * b;
        for (Eigen::Index i = 0; i < n; ++i) {
            double mag = std::max(std::abs(resid(i)), cfg.epsilon);
            // Majorizer of the check loss at the current residual:
            // r^2 / (4 mag) + (tau - 1/2) r, i.e. weights 1/(2 mag) on the
            // shifted response y + (2 tau - 1) mag.
            sw(i) = std::sqrt(0.5 / mag);
            z(i) = y(i) + (2.0 * tau - 1.0) * mag;
        }
        Eigen::MatrixXd WA = sw.asDiagonal() * A;
        Eigen::VectorXd next = WA.householderQr().solve(sw.cwiseProduct(z));
        double delta = (next - b).cwiseAbs().maxCoeff();
        b = std::move(next);
        m.report.iterations = it;
        if (delta <= cfg.tol * (1.0 + b.cwiseAbs().maxCoeff())) {
            m.report.converged = true;
            break;
        }
    }
    resid.noalias() = y - A * b;
    double loss = pinball_loss(resid, tau);

    if (cfg.polish) {
        if (auto basis = nearest_basis(A, resid)) {
            int max_pivots = static_cast<int>(std::min<Eigen::Index>(10 * (n + A.cols()), 1'000'000));
            if (auto polished = simplex_polish(A, y, tau, std::move(*basis), max_pivots)) {
                m.report.pivots = polished->pivots;
                // Prefer the basic solution unless IRLS is better by more than round-off.
                if (polished->loss <= loss * (1.0 + 1e-12) + 1e-300) {
                    b = polished->coefficients;
                    loss = polished->loss;
                }
                m.report.converged = m.report.converged || polished->optimal;
            }
        }
    }
    m.coefficients = std::move(b);
    m.report.final_loss = loss;
    return m;
}

}  // namespace

std::string_view solver_method_name(SolverMethod m)
{
    return m == SolverMethod::IRLS ? "IRLS" : "EXACT_SMALL";
}

SolverMethod parse_solver_method(std::string_view name)
{
    if (name == "IRLS") return SolverMethod::IRLS;
    if (name == "EXACT_SMALL") return SolverMethod::ExactSmall;
    throw ConfigError("solver.method must be IRLS or EXACT_SMALL, got '" + std::string(name) + "'");
}

void SolverConfig::validate() const
{
    if (!(epsilon > 0.0)) throw ConfigError("solver.epsilon must be > 0");
    if (!(tol > 0.0)) throw ConfigError("solver.tol must be > 0");
    if (max_iter < 1) throw ConfigError("solver.max_iter must be >= 1");
}

double pinball_loss(std::span<const double> residuals, double tau)
{
    double s = 0.0;
    for (double r : residuals) s += r >= 0.0 ? tau * r : (tau - 1.0) * r;
    return s;
}

double pinball_loss(const Eigen::VectorXd& residuals, double tau)
{
    return pinball_loss(std::span<const double>(residuals.data(), static_cast<std::size_t>(residuals.size())), tau);
}

QuantileModel fit_quantile(const DesignMatrix& X, const Eigen::VectorXd& y, double tau, const SolverConfig& cfg)
{
    cfg.validate();
    check_inputs(X, y, tau);
    require_full_rank(X);
    return cfg.method == SolverMethod::ExactSmall ? fit_exact_small(X, y, tau) : fit_irls(X, y, tau, cfg);
}

Eigen::VectorXd predict(const QuantileModel& model, const DesignMatrix& X)
{
    if (X.names() != model.columns) throw DataError("prediction design columns do not match the fitted model");
    return X.values() * model.coefficients;
}

}  // namespace engage
