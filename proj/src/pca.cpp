#include "sec/pca.hpp"

#include <Eigen/Eigenvalues>

namespace sec {

PcaModel fit_pca(const Matrix& X, Index target_dim) {
    const Index d = X.rows();
    const Index n = X.cols();
    if (target_dim < 1 || target_dim > d)
        throw InputError("fit_pca: target dimension " + std::to_string(target_dim) +
                         " outside 1.." + std::to_string(d));
    if (n < 2) throw InputError("fit_pca: need at least two samples");
    if (!X.allFinite()) throw InputError("fit_pca: non-finite input");

    PcaModel m;
    m.mean = X.rowwise().mean();
    const Matrix centered = X.colwise() - m.mean;
    Matrix cov = centered * centered.transpose() / static_cast<double>(n - 1);
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    if (eig.info() != Eigen::Success) throw SolverError("fit_pca: eigendecomposition failed", 0.0);
    m.variances = eig.eigenvalues().reverse().cwiseMax(0.0);
    m.components = eig.eigenvectors().rowwise().reverse().leftCols(target_dim);
    for (Index k = 0; k < target_dim; ++k) {
        Index top = 0;
        m.components.col(k).cwiseAbs().maxCoeff(&top);
        if (m.components(top, k) < 0) m.components.col(k) *= -1.0;
    }

    const double total = m.variances.sum();
    m.captured_variance_ratio = total > 0.0 ? m.variances.head(target_dim).sum() / total : 1.0;
    return m;
}

Matrix pca_transform(const PcaModel& model, const Matrix& X) {
    if (X.rows() != model.input_dim())
        throw InputError("pca_transform: expected " + std::to_string(model.input_dim()) +
                         " features, got " + std::to_string(X.rows()));
    return model.components.transpose() * (X.colwise() - model.mean);
}

Matrix pca_reduce(const Matrix& X, Index target_dim) {
    return pca_transform(fit_pca(X, target_dim), X);
}

}  // namespace sec
