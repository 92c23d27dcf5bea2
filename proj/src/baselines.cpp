#include "sec/baselines.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace sec {

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::ridge_regression: return "ridge";
        case BaselineKind::knn: return "knn";
        case BaselineKind::gaussian_nb: return "gaussian_nb";
        case BaselineKind::linear_svm: return "linear_svm";
        case BaselineKind::external: return "external";
    }
    return "unknown";
}

BaselineKind parse_baseline_kind(std::string_view name) {
    if (name == "ridge" || name == "ridge_regression") return BaselineKind::ridge_regression;
    if (name == "knn") return BaselineKind::knn;
    if (name == "gaussian_nb" || name == "naive_bayes") return BaselineKind::gaussian_nb;
    if (name == "linear_svm" || name == "svm") return BaselineKind::linear_svm;
    if (name == "external") return BaselineKind::external;
    throw InputError("unknown baseline kind '" + std::string(name) + "'");
}

BaselineSpec BaselineSpec::ridge(double regularization) {
    BaselineSpec s;
    s.kind = BaselineKind::ridge_regression;
    s.regularization = regularization;
    return s;
}

BaselineSpec BaselineSpec::knn(int k) {
    BaselineSpec s;
    s.kind = BaselineKind::knn;
    s.k = k;
    return s;
}

BaselineSpec BaselineSpec::gaussian_nb() {
    BaselineSpec s;
    s.kind = BaselineKind::gaussian_nb;
    return s;
}

BaselineSpec BaselineSpec::linear_svm(double regularization) {
    BaselineSpec s;
    s.kind = BaselineKind::linear_svm;
    s.regularization = regularization;
    return s;
}

BaselineSpec BaselineSpec::external(std::string path) {
    BaselineSpec s;
    s.kind = BaselineKind::external;
    s.path = std::move(path);
    return s;
}

std::string BaselineSpec::id() const {
    return kind == BaselineKind::external ? "external:" + path : to_string(kind);
}

void BaselineSpec::validate() const {
    if (kind == BaselineKind::knn && k < 1) throw InputError("knn needs k >= 1");
    if ((kind == BaselineKind::ridge_regression || kind == BaselineKind::linear_svm) &&
        !(regularization > 0.0))
        throw InputError(to_string(kind) + " needs regularization > 0");
    if (kind == BaselineKind::linear_svm && epochs < 1) throw InputError("linear_svm needs epochs >= 1");
    if (kind == BaselineKind::external && path.empty())
        throw InputError("external baseline needs a predictions path");
}

namespace {

RidgeModel fit_ridge(const Matrix& X, const Matrix& targets, double reg) {
    const Vector x_mean = X.rowwise().mean();
    const Vector y_mean = targets.rowwise().mean();
    const Matrix Xc = X.colwise() - x_mean;
    const Matrix Yc = targets.colwise() - y_mean;

    Matrix gram = Xc * Xc.transpose();
    gram.diagonal().array() += reg;
    RidgeModel m;
    m.weights = gram.ldlt().solve(Xc * Yc.transpose());
    m.bias = y_mean - m.weights.transpose() * x_mean;
    return m;
}

GaussianNbModel fit_gaussian_nb(const Matrix& X, const std::vector<int>& ids, Index classes) {
    const Index d = X.rows();
    GaussianNbModel m;
    m.means = Matrix::Zero(d, classes);
    m.variances = Matrix::Zero(d, classes);
    m.log_priors = Vector::Constant(classes, -std::numeric_limits<double>::infinity());

    std::vector<Index> counts(static_cast<std::size_t>(classes), 0);
    for (Index i = 0; i < X.cols(); ++i) {
        m.means.col(ids[static_cast<std::size_t>(i)]) += X.col(i);
        ++counts[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])];
    }
    for (Index k = 0; k < classes; ++k)
        if (counts[static_cast<std::size_t>(k)] > 0) m.means.col(k) /= static_cast<double>(counts[static_cast<std::size_t>(k)]);
    for (Index i = 0; i < X.cols(); ++i) {
        const int k = ids[static_cast<std::size_t>(i)];
        m.variances.col(k) += (X.col(i) - m.means.col(k)).cwiseAbs2();
    }
    for (Index k = 0; k < classes; ++k) {
        const auto count = counts[static_cast<std::size_t>(k)];
        if (count > 0) {
            m.variances.col(k) /= static_cast<double>(count);
            m.log_priors(k) = std::log(static_cast<double>(count) / static_cast<double>(X.cols()));
        }
    }
    m.variances = m.variances.cwiseMax(kNaiveBayesVarianceFloor);
    return m;
}

// Full-batch subgradient descent on (reg/2)|w|^2 + mean hinge, one-vs-rest,
// with the bias carried as a constant feature.
LinearSvmModel fit_linear_svm(const Matrix& X, const Matrix& targets, double reg, int epochs) {
    const Index d = X.rows();
    const Index n = X.cols();
    const Index c = targets.rows();
    Matrix augmented(d + 1, n);
    augmented.topRows(d) = X;
    augmented.row(d).setOnes();

    Matrix w = Matrix::Zero(d + 1, c);
    for (int t = 1; t <= epochs; ++t) {
        const double step = 1.0 / (reg * t);
        const Matrix margins = (w.transpose() * augmented).cwiseProduct(targets);  // c x n
        Matrix violated = (margins.array() < 1.0).cast<double>().matrix().cwiseProduct(targets);
        const Matrix subgradient = reg * w - augmented * violated.transpose() / static_cast<double>(n);
        w -= step * subgradient;
    }
    return {w.topRows(d), w.row(d).transpose()};
}

Matrix knn_decisions(const KnnModel& m, Index classes, const Matrix& X) {
    const Index n = m.points.cols();
    const Index k = std::min<Index>(m.k, n);
    Matrix out(classes, X.cols());
    std::vector<std::pair<double, Index>> dist(static_cast<std::size_t>(n));
    for (Index q = 0; q < X.cols(); ++q) {
        for (Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = {(m.points.col(i) - X.col(q)).squaredNorm(), i};
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        Vector votes = Vector::Zero(classes);
        for (Index r = 0; r < k; ++r) votes(m.labels[static_cast<std::size_t>(dist[static_cast<std::size_t>(r)].second)]) += 1.0;
        out.col(q) = 2.0 * votes / static_cast<double>(k) - Vector::Ones(classes);
    }
    return out;
}

Matrix nb_decisions(const GaussianNbModel& m, const Matrix& X) {
    const Index c = m.means.cols();
    Matrix out(c, X.cols());
    const Vector log_norm =
        -0.5 * (m.variances.array() * (2.0 * std::numbers::pi)).log().colwise().sum().transpose();
    for (Index q = 0; q < X.cols(); ++q) {
        Vector log_post(c);
        for (Index k = 0; k < c; ++k) {
            const double quad =
                ((m.means.col(k) - X.col(q)).array().square() / m.variances.col(k).array()).sum();
            log_post(k) = m.log_priors(k) + log_norm(k) - 0.5 * quad;
        }
        const double top = log_post.maxCoeff();
        Vector post = (log_post.array() - top).exp().matrix();
        post /= post.sum();
        out.col(q) = 2.0 * post - Vector::Ones(c);
    }
    return out;
}

}  // namespace

BaselineModel fit_baseline(const BaselineSpec& spec, const Matrix& X1, const LabelMatrix& labels) {
    spec.validate();
    if (spec.kind == BaselineKind::external)
        throw TrainingError("external baselines are loaded from prediction files, not trained");
    if (labels.encoding() != LabelEncoding::pm1) throw InputError("fit_baseline expects pm1 labels");
    if (X1.cols() != labels.samples())
        throw InputError("fit_baseline: feature and label sample counts differ");
    if (!X1.allFinite()) throw InputError("fit_baseline: non-finite features");

    const Index c = labels.classes();
    const Index n = X1.cols();
    if (n < c)
        throw TrainingError("fit_baseline: " + std::to_string(n) + " samples for " +
                            std::to_string(c) + " classes");
    const auto ids = labels.class_ids();
    std::vector<int> present(ids);
    std::sort(present.begin(), present.end());
    if (std::unique(present.begin(), present.end()) - present.begin() < 2)
        throw TrainingError("fit_baseline: training labels contain a single class");

    BaselineModel out{spec, X1.rows(), c, RidgeModel{}};
    switch (spec.kind) {
        case BaselineKind::ridge_regression:
            out.model = fit_ridge(X1, labels.values(), spec.regularization);
            break;
        case BaselineKind::knn:
            out.model = KnnModel{X1, ids, spec.k};
            break;
        case BaselineKind::gaussian_nb:
            out.model = fit_gaussian_nb(X1, ids, c);
            break;
        case BaselineKind::linear_svm:
            out.model = fit_linear_svm(X1, labels.values(), spec.regularization, spec.epochs);
            break;
        case BaselineKind::external:
            break;
    }
    return out;
}

DecisionMatrix decision_values(const BaselineModel& model, const Matrix& X) {
    if (X.rows() != model.features)
        throw InputError("decision_values: expected " + std::to_string(model.features) +
                         " features, got " + std::to_string(X.rows()));
    if (!X.allFinite()) throw InputError("decision_values: non-finite features");

    Matrix values = std::visit(
        [&](const auto& m) -> Matrix {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, RidgeModel> || std::is_same_v<T, LinearSvmModel>) {
                Matrix v = m.weights.transpose() * X;
                v.colwise() += m.bias;
                return v;
            } else if constexpr (std::is_same_v<T, KnnModel>) {
                return knn_decisions(m, model.classes, X);
            } else {
                return nb_decisions(m, X);
            }
        },
        model.model);
    return {std::move(values), model.spec.id()};
}

}  // namespace sec
