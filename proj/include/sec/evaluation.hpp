#pragma once

#include "sec/adaptation.hpp"
#include "sec/labels.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sec {

/// 1 - |Y_pred - Y*|_F^2 / (2t) on 0/1 matrices (pm1 inputs are converted).
double accuracy(const LabelMatrix& Y_pred, const LabelMatrix& Y_star);

/// Accuracy implied by a squared label distance over t columns.
double accuracy_from_distance(double distance, Index t);

/// Binary: F1 of class 0. Multiclass: macro-averaged F1, empty classes
/// scoring 0.
double f_score(const LabelMatrix& Y_pred, const LabelMatrix& Y_star);

enum class Verdict { win, tie, loss };

std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& name);
/// Table mark: win "•", tie "⊙", loss "○".
std::string verdict_mark(Verdict v);

struct TTestResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    Verdict verdict = Verdict::tie;
};

/// Paired two-tailed Student t test on a - b.
TTestResult paired_t_test(const std::vector<double>& scores_a, const std::vector<double>& scores_b,
                          double alpha = 0.05);

struct SplitPlan {
    double train_fraction = 0.5;
    int repetitions = 1;
    std::uint64_t seed = 0;
};

struct Split {
    std::vector<Index> train;  // permutation order
    std::vector<Index> test;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of repetition r: master xor splitmix64(r).
std::uint64_t repetition_seed(std::uint64_t master, int repetition);

/// Uniform random permutation of 0..n-1 (Fisher-Yates on mt19937_64 with
/// rejection sampling, so the output is identical across standard libraries).
std::vector<Index> random_permutation(Index n, std::uint64_t seed);

Split make_split(Index n_total, double train_fraction, std::uint64_t seed);
std::vector<Split> make_splits(Index n_total, const SplitPlan& plan);

/// Contiguous blocks of near-equal size over 0..n-1.
std::vector<std::vector<Index>> make_folds(Index n, int folds);

std::vector<double> default_lambda_grid();

struct CrossValidationResult {
    double lambda = 0.0;
    std::vector<double> grid;
    std::vector<double> mean_accuracy;  // NaN where every fold failed
};

/// Picks the grid value with the best mean held-out accuracy of the adapted
/// classifier; ties go to the smaller value. F holds the baseline's training
/// decision values; the baseline itself is not retrained per fold.
CrossValidationResult cross_validate_lambda(const DecisionMatrix& F, const LabelMatrix& Y,
                                            const Matrix& X2, const KernelSpec& kernel,
                                            const std::vector<double>& grid, int folds = 5,
                                            const AdaptationOptions& options = {});

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;  // sample (n - 1)
};

Summary summarize(const std::vector<double>& values);

}  // namespace sec
