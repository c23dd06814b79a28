#pragma once

#include "engage/design.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

enum class SolverMethod { IRLS, ExactSmall };

std::string_view solver_method_name(SolverMethod m);
SolverMethod parse_solver_method(std::string_view name);

struct SolverConfig {
    SolverMethod method = SolverMethod::IRLS;
    double epsilon = 1e-9;  // floor on |residual| in the IRLS weights
    double tol = 1e-8;      // coefficient-change stopping rule
    int max_iter = 500;
    // Finish IRLS with simplex pivots from the nearest basic solution.
    bool polish = true;

    void validate() const;
};

struct SolverReport {
    int iterations = 0;
    int pivots = 0;
    double final_loss = 0.0;
    bool converged = false;
};

struct QuantileModel {
    double tau = 0.5;
    std::vector<std::string> columns;
    Eigen::VectorXd coefficients;
    SolverReport report;
};

/// Sum of tau*r over r >= 0 and (tau - 1)*r over r < 0.
double pinball_loss(std::span<const double> residuals, double tau);
double pinball_loss(const Eigen::VectorXd& residuals, double tau);

/// Linear conditional-quantile fit. Throws NumericalError on a rank-deficient
/// design and ConfigError on bad tau/config or an oversized ExactSmall
/// enumeration. Running out of iterations is reported, not thrown.
QuantileModel fit_quantile(const DesignMatrix& X, const Eigen::VectorXd& y, double tau, const SolverConfig& cfg = {});

/// Throws DataError when X's columns differ from the model's.
Eigen::VectorXd predict(const QuantileModel& model, const DesignMatrix& X);

}  // namespace engage
