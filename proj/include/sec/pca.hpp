#pragma once

#include "sec/common.hpp"

namespace sec {

struct PcaModel {
    Vector mean;        // d
    Matrix components;  // d x k, orthonormal columns
    Vector variances;   // all d covariance eigenvalues, descending
    double captured_variance_ratio = 1.0;

    Index input_dim() const noexcept { return mean.size(); }
    Index output_dim() const noexcept { return components.cols(); }
};

/// Principal axes of the columns of X (d x n), sample covariance. Each axis is
/// signed so its largest-magnitude entry is positive.
PcaModel fit_pca(const Matrix& X, Index target_dim);

/// k x N scores of X relative to the fitted mean.
Matrix pca_transform(const PcaModel& model, const Matrix& X);

Matrix pca_reduce(const Matrix& X, Index target_dim);

}  // namespace sec
