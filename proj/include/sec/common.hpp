#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace sec {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Malformed or mismatched inputs (shapes, encodings, non-finite values).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A linear system could not be solved to the required accuracy.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_estimate_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_estimate_; }

private:
    double condition_estimate_;
};

// A classifier could not be trained on the given data.
class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// File contents that do not match the expected layout. Row and column are
// 1-based; zero means "not applicable".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, Index row, Index column, const std::string& detail)
        : std::runtime_error(format(path, row, column, detail)), row_(row), column_(column) {}

    Index row() const noexcept { return row_; }
    Index column() const noexcept { return column_; }

private:
    static std::string format(const std::string& path, Index row, Index column,
                              const std::string& detail) {
        std::string msg = path;
        if (row > 0) msg += ":row " + std::to_string(row);
        if (column > 0) msg += ":column " + std::to_string(column);
        return msg + ": " + detail;
    }

    Index row_;
    Index column_;
};

}  // namespace sec
