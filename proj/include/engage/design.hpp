#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace engage {

inline constexpr std::string_view kInterceptName = "intercept";

// Named predictor columns over n rows. Exactly one column is the intercept
// (all ones) and every value is finite.
class DesignMatrix {
public:
    DesignMatrix() = default;

    /// Builds from columns; validates names, shape and finiteness.
    DesignMatrix(std::vector<std::string> names, Eigen::MatrixXd values);

    /// Intercept plus the given columns (in order).
    static DesignMatrix with_intercept(const std::vector<std::string>& names,
                                       const std::vector<Eigen::VectorXd>& columns);

    Eigen::Index rows() const { return values_.rows(); }
    Eigen::Index cols() const { return values_.cols(); }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& names() const { return names_; }

    std::optional<Eigen::Index> find(std::string_view name) const;
    Eigen::Index index_of(std::string_view name) const;  // throws DataError
    Eigen::VectorXd column(std::string_view name) const;

    /// Appends a column; throws DataError if the name exists.
    void append(std::string name, const Eigen::VectorXd& column);

    /// Rows in `index` order (the row count may drop below the column count).
    DesignMatrix select_rows(const std::vector<Eigen::Index>& index) const;

    DesignMatrix drop_columns(const std::vector<std::string>& names) const;

private:
    std::vector<std::string> names_;
    Eigen::MatrixXd values_;
};

/// Throws NumericalError naming the columns a pivoted QR finds dependent.
void require_full_rank(const DesignMatrix& X);

}  // namespace engage
