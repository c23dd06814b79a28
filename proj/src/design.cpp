#include "engage/design.hpp"

#include "engage/error.hpp"

#include <algorithm>
#include <set>

namespace engage {

DesignMatrix::DesignMatrix(std::vector<std::string> names, Eigen::MatrixXd values)
    : names_(std::move(names)), values_(std::move(values))
{
    if (static_cast<Eigen::Index>(names_.size()) != values_.cols()) {
        throw DataError("design matrix: " + std::to_string(names_.size()) + " names for " +
                        std::to_string(values_.cols()) + " columns");
    }
    std::set<std::string_view> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw DataError("design matrix: duplicate column '" + n + "'");
    }
    auto icpt = std::count(names_.begin(), names_.end(), kInterceptName);
    if (icpt != 1) throw DataError("design matrix: intercept column must appear exactly once");
    if (!values_.allFinite()) throw DataError("design matrix: non-finite value");
    auto ic = index_of(kInterceptName);
    if ((values_.col(ic).array() != 1.0).any()) throw DataError("design matrix: intercept column is not all ones");
}

DesignMatrix DesignMatrix::with_intercept(const std::vector<std::string>& names,
                                          const std::vector<Eigen::VectorXd>& columns)
{
    if (names.size() != columns.size()) throw DataError("design matrix: name/column count mismatch");
    Eigen::Index n = columns.empty() ? 0 : columns.front().size();
    Eigen::MatrixXd m(n, static_cast<Eigen::Index>(columns.size()) + 1);
    m.col(0).setOnes();
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j].size() != n) throw DataError("design matrix: ragged column '" + names[j] + "'");
        m.col(static_cast<Eigen::Index>(j) + 1) = columns[j];
    }
    std::vector<std::string> all{std::string(kInterceptName)};
    all.insert(all.end(), names.begin(), names.end());
    return DesignMatrix(std::move(all), std::move(m));
}

std::optional<Eigen::Index> DesignMatrix::find(std::string_view name) const
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<Eigen::Index>(it - names_.begin());
}

Eigen::Index DesignMatrix::index_of(std::string_view name) const
{
    auto j = find(name);
    if (!j) throw DataError("design matrix: unknown column '" + std::string(name) + "'");
    return *j;
}

Eigen::VectorXd DesignMatrix::column(std::string_view name) const
{
    return values_.col(index_of(name));
}

void DesignMatrix::append(std::string name, const Eigen::VectorXd& column)
{
    if (find(name)) throw DataError(name + " exists");
    if (column.size() != values_.rows()) throw DataError("design matrix: column '" + name + "' has wrong length");
    if (!column.allFinite()) throw DataError("design matrix: non-finite value in '" + name + "'");
    values_.conservativeResize(Eigen::NoChange, values_.cols() + 1);
    values_.col(values_.cols() - 1) = column;
    names_.push_back(std::move(name));
}

DesignMatrix DesignMatrix::select_rows(const std::vector<Eigen::Index>& index) const
{
    Eigen::MatrixXd m(static_cast<Eigen::Index>(index.size()), values_.cols());
    for (std::size_t i = 0; i < index.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = values_.row(index[i]);
    return DesignMatrix(names_, std::move(m));
}

DesignMatrix DesignMatrix::drop_columns(const std::vector<std::string>& names) const
{
    std::vector<std::string> keep_names;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < values_.cols(); ++j) {
        const auto& n = names_[static_cast<std::size_t>(j)];
        if (std::find(names.begin(), names.end(), n) != names.end()) continue;
        keep_names.push_back(n);
        keep.push_back(j);
    }
    Eigen::MatrixXd m(values_.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = values_.col(keep[k]);
    return DesignMatrix(std::move(keep_names), std::move(m));
}

void require_full_rank(const DesignMatrix& X)
{
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X.values());
    if (qr.rank() == X.cols()) return;
    // Slow path: scan left to right so the reported columns are the ones
    // spanned by columns earlier in the design.
    std::string dependent;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        Eigen::MatrixXd trial(X.rows(), static_cast<Eigen::Index>(kept.size()) + 1);
        for (std::size_t k = 0; k < kept.size(); ++k) trial.col(static_cast<Eigen::Index>(k)) = X.values().col(kept[k]);
        trial.col(trial.cols() - 1) = X.values().col(j);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> t(trial);
        t.setThreshold(qr.threshold());
        if (t.rank() == trial.cols()) {
            kept.push_back(j);
        } else {
            if (!dependent.empty()) dependent += ", ";
            dependent += X.names()[static_cast<std::size_t>(j)];
        }
    }
    throw NumericalError("rank-deficient design; dependent column(s): " + dependent);
}

}  // namespace engage
