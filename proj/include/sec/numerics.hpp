#pragma once

#include "sec/common.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace sec {

enum class KernelFamily { linear, rbf };

// k(x, z) = x'z for linear, exp(-gamma * |x - z|^2) for rbf.
struct KernelSpec {
    KernelFamily family = KernelFamily::linear;
    double gamma = 0.0;

    static KernelSpec linear() { return {}; }
    static KernelSpec rbf(double gamma) { return {KernelFamily::rbf, gamma}; }

    void validate() const {
        if (family == KernelFamily::rbf && !(gamma > 0.0 && std::isfinite(gamma)))
            throw InputError("rbf kernel requires a finite gamma > 0");
    }

    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

inline std::string to_string(KernelFamily family) {
    return family == KernelFamily::linear ? "linear" : "rbf";
}

inline KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "linear") return KernelFamily::linear;
    if (name == "rbf") return KernelFamily::rbf;
    throw InputError("unknown kernel family '" + std::string(name) + "'");
}

template <typename Scalar>
struct GramMatrix {
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    MatrixType values;
    std::string row_source;
    std::string column_source;
    KernelSpec kernel;

    Index rows() const { return values.rows(); }
    Index cols() const { return values.cols(); }
};

namespace detail {

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
    if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

}  // namespace detail

/// Self-Gram matrix of the columns of X (d x n). The result is exactly
/// symmetric, and the rbf diagonal is exactly one.
template <typename Derived>
GramMatrix<typename Derived::Scalar> gram_matrix(const Eigen::MatrixBase<Derived>& X,
                                                 const KernelSpec& spec,
                                                 std::string source = "X") {
    using Scalar = typename Derived::Scalar;
    using MatrixType = typename GramMatrix<Scalar>::MatrixType;

    spec.validate();
    if (X.cols() < 1) throw InputError("gram_matrix: need at least one column");
    detail::require_finite(X, "gram_matrix input");

    const Index n = X.cols();
    MatrixType K(n, n);
    if (spec.family == KernelFamily::linear) {
        K.noalias() = X.transpose() * X;
        K.template triangularView<Eigen::StrictlyUpper>() = K.transpose();
    } else {
        const Scalar gamma = static_cast<Scalar>(spec.gamma);
        for (Index j = 0; j < n; ++j) {
            K(j, j) = Scalar(1);
            for (Index i = j + 1; i < n; ++i) {
                const Scalar v = std::exp(-gamma * (X.col(i) - X.col(j)).squaredNorm());
                K(i, j) = v;
                K(j, i) = v;
            }
        }
    }
    return {std::move(K), source, source, spec};
}

/// Kernel values between the columns of Xa (d x n1) and Xb (d x n2).
/// When both arguments hold the same matrix the result is the self-Gram.
template <typename DerivedA, typename DerivedB>
GramMatrix<typename DerivedA::Scalar> cross_gram(const Eigen::MatrixBase<DerivedA>& Xa,
                                                 const Eigen::MatrixBase<DerivedB>& Xb,
                                                 const KernelSpec& spec,
                                                 std::string row_source = "Xa",
                                                 std::string column_source = "Xb") {
    using Scalar = typename DerivedA::Scalar;
    using MatrixType = typename GramMatrix<Scalar>::MatrixType;

    spec.validate();
    if (Xa.rows() != Xb.rows())
        throw InputError("cross_gram: feature dimensions differ (" + std::to_string(Xa.rows()) +
                         " vs " + std::to_string(Xb.rows()) + ")");
    detail::require_finite(Xa, "cross_gram left input");
    detail::require_finite(Xb, "cross_gram right input");

    if (Xa.cols() == Xb.cols() && Xa.cols() > 0 && Xa == Xb) {
        auto g = gram_matrix(Xa, spec, row_source);
        g.column_source = std::move(column_source);
        return g;
    }

    MatrixType K(Xa.cols(), Xb.cols());
    if (spec.family == KernelFamily::linear) {
        K.noalias() = Xa.transpose() * Xb;
    } else {
        const Scalar gamma = static_cast<Scalar>(spec.gamma);
        for (Index j = 0; j < Xb.cols(); ++j)
            for (Index i = 0; i < Xa.cols(); ++i)
                K(i, j) = std::exp(-gamma * (Xa.col(i) - Xb.col(j)).squaredNorm());
    }
    return {std::move(K), std::move(row_source), std::move(column_source), spec};
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& symmetric) {
    using MatrixType = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SelfAdjointEigenSolver<MatrixType> eig(symmetric.eval(), Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff();
}

/// Symmetric within 1e-12 and PSD down to -psd_tolerance on the smallest
/// eigenvalue.
template <typename Scalar>
bool is_valid_gram(const GramMatrix<Scalar>& K, double psd_tolerance = 1e-8) {
    if (K.rows() != K.cols() || K.rows() == 0) return false;
    if ((K.values - K.values.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
    return min_eigenvalue(K.values) >= -psd_tolerance;
}

/// Solves (A + reg * I) X = B.
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> regularized_solve(
    const Eigen::MatrixBase<DerivedA>& A, typename DerivedA::Scalar reg,
    const Eigen::MatrixBase<DerivedB>& B) {
    using Scalar = typename DerivedA::Scalar;
    using MatrixType = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    if (!(reg > Scalar(0))) throw InputError("regularized_solve: reg must be positive");
    if (A.rows() != A.cols()) throw InputError("regularized_solve: A must be square");
    if (B.rows() != A.rows()) throw InputError("regularized_solve: B has the wrong row count");
    detail::require_finite(A, "regularized_solve matrix");
    detail::require_finite(B, "regularized_solve right-hand side");

    MatrixType system = A;
    system.diagonal().array() += reg;
    Eigen::PartialPivLU<MatrixType> lu(system);
    const Scalar rcond = lu.rcond();
    if (!(rcond > std::numeric_limits<Scalar>::epsilon()))
        throw SolverError("regularized_solve: matrix is numerically singular",
                          rcond > 0 ? Scalar(1) / rcond : std::numeric_limits<Scalar>::infinity());

    MatrixType X = lu.solve(B);
    // Normwise backward error, so badly scaled but well posed systems pass.
    const Scalar scale = system.norm();
    auto budget = [&] { return Scalar(1e-8) * (scale * X.norm() + B.norm()); };
    MatrixType residual = B - system * X;
    // Iterative refinement for the badly scaled systems heavy reweighting produces.
    for (int step = 0; step < 3 && residual.norm() > budget(); ++step) {
        X += lu.solve(residual);
        residual = B - system * X;
    }
    if (!(residual.norm() <= budget()))
        throw SolverError("regularized_solve: residual " + std::to_string(residual.norm()) +
                              " exceeds tolerance",
                          Scalar(1) / rcond);
    return X;
}

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}.
/// Sort-and-threshold, O(c log c). Points already on the simplex (to within
/// rounding) are returned unchanged, so the projection is idempotent.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> simplex_projection(
    const Eigen::MatrixBase<Derived>& v) {
    using Scalar = typename Derived::Scalar;
    using VectorType = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    VectorType x = v.reshaped();
    const Index c = x.size();
    if (c < 1) throw InputError("simplex_projection: empty vector");
    detail::require_finite(x, "simplex_projection input");

    const Scalar slack = Scalar(8) * static_cast<Scalar>(c) * std::numeric_limits<Scalar>::epsilon();
    if (x.minCoeff() >= Scalar(0) && std::abs(x.sum() - Scalar(1)) <= slack) return x;

    std::vector<Scalar> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());

    Scalar cumulative = 0;
    Scalar threshold = 0;
    for (Index j = 0; j < c; ++j) {
        cumulative += sorted[j];
        const Scalar candidate = (cumulative - Scalar(1)) / static_cast<Scalar>(j + 1);
        if (sorted[j] - candidate > Scalar(0)) threshold = candidate;
    }

    VectorType out = (x.array() - threshold).cwiseMax(Scalar(0)).matrix();
    // Large inputs leave O(eps * |v|) cancellation error in the total.
    out /= out.sum();
    return out;
}

}  // namespace sec
