#pragma once

#include "sec/labels.hpp"
#include "sec/numerics.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace sec {

inline constexpr double kThetaMax = 1e6;

struct AStageState {
    double lambda1 = 0.5;
    double lambda2 = 0.5;
    Vector theta;  // n
    Matrix slack;  // c x n, M
    Matrix Z;      // c x n
    Matrix H;      // n x n
    Vector xi;     // n
    double reg = 1.0;

    /// lambda1 = lambda2 = 1/2, theta = 1, M = 0.
    static AStageState initial(Index classes, Index samples, double reg);
};

struct AdaptedModel {
    Matrix T;  // c x n dual operator, W'Phi(X) = T K(X_tr, X)
    Vector b;  // c
    // d2 x c, linear kernel with d2 < n. T K is an ill-conditioned way to
    // evaluate W'x once theta / reg gets large, so feature inputs use this.
    std::optional<Matrix> W;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    KernelSpec kernel;
    std::shared_ptr<const Matrix> view2_train;  // d2 x n
    std::uint64_t view2_hash = 0;
    std::string baseline_id;

    Index classes() const noexcept { return T.rows(); }
    Index samples() const noexcept { return T.cols(); }
};

struct DualUpdate {
    Matrix T;
    Vector b;
    std::optional<Matrix> W;  // L'T', d2 x c, filled by the low-rank solve
};

struct MixingUpdate {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    bool kept_previous = false;
};

/// FNV-1a over the shape and the raw column-major doubles.
std::uint64_t content_hash(const Matrix& m);

/// xi_i = |lambda1 f_i + lambda2 fitted_i - y_i - y_i o m_i|^2.
Vector compute_residual_xi(const AStageState& state, const Matrix& F, const Matrix& Y,
                           const Matrix& fitted);

/// theta_i = 1/(2 sqrt(xi_i)) when sqrt(xi_i) <= 1, else 0; capped at theta_max.
Vector update_theta(const Vector& xi, double theta_max = kThetaMax);

/// Theta - Theta e e' Theta / (e' Theta e). Returns Theta itself when every
/// weight is zero.
Matrix centering_operator(const Vector& theta);

/// Z = Y + Y o M - lambda1 F.
Matrix target_offsets(const AStageState& state, const Matrix& F, const Matrix& Y);

/// Weighted kernel ridge step for (T, b) given state.Z, state.theta,
/// state.lambda2 and state.reg. `kernel_factor`, when given, must satisfy
/// K = L L' and switches to a weighted least-squares solve in the factor's
/// coordinates, which stays accurate for small reg. Returns nullopt when no
/// point carries weight.
std::optional<DualUpdate> update_dual_operator_and_bias(const AStageState& state, const Matrix& K,
                                                        const Matrix* kernel_factor = nullptr);

/// m_i = max(lambda1 y_i o f_i + lambda2 y_i o fitted_i - 1, 0).
Matrix update_slack(const AStageState& state, const Matrix& F, const Matrix& Y,
                    const Matrix& fitted);

/// Weighted least squares for (lambda1, lambda2) minimizing
/// sum_i theta_i |lambda1 a_i + lambda2 b_i - c_i|^2. Keeps the previous pair
/// when the 2x2 system is singular.
MixingUpdate update_mixing(const Matrix& a, const Matrix& b, const Matrix& c, const Vector& theta,
                           double previous_lambda1, double previous_lambda2);

/// lambda |W|_F^2 + sum_i min(sqrt(xi_i), 1).
double objective_value(const AStageState& state, const Matrix& F, const Matrix& Y,
                       const Matrix& fitted, double w_norm_sq);

struct AdaptationOptions {
    int max_iterations = 50;
    double tolerance = 1e-5;  // relative objective decrease
    double theta_max = kThetaMax;
    bool fix_lambda2_zero = false;
    bool record_states = false;
};

struct AdaptationTrace {
    std::vector<double> objective;  // one entry per completed iteration
    std::vector<AStageState> states;  // filled when record_states is set
    int iterations = 0;
    bool converged = false;
    bool all_capped = false;
    bool mixing_kept_previous = false;
};

struct AdaptationResult {
    AdaptedModel model;
    AdaptationTrace trace;
    Matrix training_decisions;  // lambda1 F + lambda2 fitted at the final iterate
    std::optional<std::string> warning;
};

/// Alternating minimization of the capped hinge objective. F (c x n) are the
/// baseline's training decision values, Y pm1 labels, X2 (d2 x n).
AdaptationResult adapt_classifier(const DecisionMatrix& F, const LabelMatrix& Y,
                                  std::shared_ptr<const Matrix> X2, const KernelSpec& kernel,
                                  double reg, const AdaptationOptions& options = {});

AdaptationResult adapt_classifier(const DecisionMatrix& F, const LabelMatrix& Y, const Matrix& X2,
                                  const KernelSpec& kernel, double reg,
                                  const AdaptationOptions& options = {});

/// g = lambda1 F + lambda2 (T K + b 1').
DecisionMatrix predict_adapted(const AdaptedModel& model, const DecisionMatrix& F_test,
                               const GramMatrix<double>& K_tr_te);

/// Same from view-2 features: W'x + b when the model carries primal
/// weights, otherwise through K built from the view-2 training matrix.
DecisionMatrix predict_adapted(const AdaptedModel& model, const DecisionMatrix& F_test,
                               const Matrix& X2_test);

}  // namespace sec
