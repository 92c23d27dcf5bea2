#pragma once

#include "sec/labels.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sec {

struct IntegrationProblem {
    std::vector<LabelMatrix> hat_Y;  // baseline predictions on test, zero_one
    std::vector<LabelMatrix> bar_Y;  // adapted predictions on test, zero_one
    Vector q;                        // surrogate radii, one per bar_Y
    Index t = 0;
    Index c = 0;

    /// Validates shapes/encodings and computes q.
    static IntegrationProblem build(std::vector<LabelMatrix> hat_Y, std::vector<LabelMatrix> bar_Y);

    Index anchors() const noexcept { return static_cast<Index>(bar_Y.size()); }
};

enum class IntegrationMethod {
    // Accelerated projected gradient on the m-dimensional dual over mixture
    // weights, finished by an active-set solve; certified by the duality gap.
    dual,
    // Projected subgradient on the primal c x t problem.
    primal_subgradient,
};

std::string to_string(IntegrationMethod method);
IntegrationMethod parse_integration_method(const std::string& name);

struct IntegrationOptions {
    double tol = 1e-6;
    int max_iters = 10000;
    IntegrationMethod method = IntegrationMethod::dual;
    std::optional<Vector> initial_weights;  // dual start (simplex point), length m
    std::optional<Matrix> initial_Y;        // primal start, c x t
};

struct IntegrationSolution {
    Matrix Y_soft;  // c x t, column-stochastic
    LabelMatrix Y_hard;
    double epsilon = 0.0;
    bool feasible = false;
    int iterations = 0;
    double gap = 0.0;
    bool converged = false;
    Vector weights;  // mixture over bar_Y (dual method) or dual estimate
    std::optional<std::string> warning;
};

inline constexpr double kFeasibilityTolerance = 1e-9;

/// q_k = min_j |hat_Y_j - bar_Y_k|_F^2.
Vector compute_surrogate_radii(const std::vector<LabelMatrix>& hat_Y,
                               const std::vector<LabelMatrix>& bar_Y);

/// Column stacking: v[i + j c] = Y(i, j).
Vector vectorize_labels(const Matrix& Y);
Matrix reshape_labels(const Vector& v, Index c, Index t);

/// phi(Y) = |Y|^2 + max_k (|bar_Y_k|^2 - q_k - 2 <bar_Y_k, Y>)
///        = max_k (|Y - bar_Y_k|^2 - q_k).
double secure_objective(const IntegrationProblem& problem, const Matrix& Y);

/// Minimizes phi over column-stochastic Y; epsilon = -phi(Y_soft).
IntegrationSolution solve_secure_program(const IntegrationProblem& problem,
                                         const IntegrationOptions& options = {});

/// Column argmax. Entries within 1e-9 of the column maximum count as tied and
/// the smallest class index wins.
LabelMatrix harden_soft_labels(const Matrix& Y_soft);

IntegrationSolution integrate(std::vector<LabelMatrix> hat_Y, std::vector<LabelMatrix> bar_Y,
                              const IntegrationOptions& options = {});

}  // namespace sec
