#pragma once

#include "sec/labels.hpp"

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace sec {

enum class BaselineKind { ridge_regression, knn, gaussian_nb, linear_svm, external };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(std::string_view name);

struct BaselineSpec {
    BaselineKind kind = BaselineKind::ridge_regression;
    int k = 5;                    // knn
    double regularization = 1.0;  // ridge, linear_svm
    int epochs = 200;             // linear_svm
    std::string path;             // external

    static BaselineSpec ridge(double regularization = 1.0);
    static BaselineSpec knn(int k = 5);
    static BaselineSpec gaussian_nb();
    static BaselineSpec linear_svm(double regularization = 1e-2);
    static BaselineSpec external(std::string path);

    /// Short identifier used in reports ("ridge", "knn", ...).
    std::string id() const;
    void validate() const;
};

struct RidgeModel {
    Matrix weights;  // d x c
    Vector bias;     // c
};

struct KnnModel {
    Matrix points;  // d x n
    std::vector<int> labels;
    int k = 5;
};

struct GaussianNbModel {
    Matrix means;      // d x c
    Matrix variances;  // d x c, floored
    Vector log_priors; // c
};

struct LinearSvmModel {
    Matrix weights;  // d x c
    Vector bias;     // c
};

/// A trained view-1 classifier. Immutable after fit_baseline.
struct BaselineModel {
    BaselineSpec spec;
    Index features = 0;
    Index classes = 0;
    std::variant<RidgeModel, KnnModel, GaussianNbModel, LinearSvmModel> model;
};

inline constexpr double kNaiveBayesVarianceFloor = 1e-9;

/// Trains on X1 (d1 x n) with pm1 labels. Throws TrainingError when n < c or
/// fewer than two classes are present.
BaselineModel fit_baseline(const BaselineSpec& spec, const Matrix& X1, const LabelMatrix& labels);

/// c x N decision values. knn and gaussian_nb report 2p - 1 (vote share or
/// posterior); ridge and linear_svm report raw affine margins.
DecisionMatrix decision_values(const BaselineModel& model, const Matrix& X);

}  // namespace sec
