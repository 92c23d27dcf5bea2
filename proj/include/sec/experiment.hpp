#pragma once

#include "sec/adaptation.hpp"
#include "sec/baselines.hpp"
#include "sec/evaluation.hpp"
#include "sec/integration.hpp"
#include "sec/security.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sec {

struct ExperimentConfig {
    std::string name = "experiment";
    std::string view1_path;           // features, one sample per row
    std::string view2_path;           // empty when view2_pca_dim is used
    Index view2_pca_dim = 0;          // > 0: view 2 = PCA of view 1 fit on the training split
    std::string labels_path;
    std::optional<Index> classes;
    bool header = false;
    bool standardize = true;          // z-score raw views with training statistics

    std::vector<BaselineSpec> baselines;  // external entries read N x c decision files

    KernelSpec kernel;
    std::optional<double> lambda;     // empty: 5-fold cross-validation over the grid
    std::vector<double> lambda_grid = default_lambda_grid();
    int cv_folds = 5;
    AdaptationOptions adaptation;
    IntegrationOptions integration;

    SplitPlan split;
    int jobs = 1;
    std::string output_dir;

    /// Throws InputError on inconsistent settings or missing files.
    void validate() const;
};

/// INI file with [data], [baselines], [adaptation], [integration], [split] and
/// [output] sections. Relative paths resolve against the file's directory.
ExperimentConfig load_config(const std::string& path);

struct MethodScores {
    std::string method;  // "Best", "Ad<baseline>", "SEC"
    double accuracy = 0.0;
    double f_score = 0.0;
};

struct RepetitionRecord {
    int index = 0;
    bool completed = false;
    std::string error;
    std::vector<std::string> warnings;

    std::vector<double> baseline_accuracy;
    std::vector<double> baseline_f_score;
    std::vector<double> adapted_accuracy;
    std::vector<double> adapted_f_score;
    std::vector<double> lambdas;
    std::vector<int> adaptation_iterations;
    double best_accuracy = 0.0;
    double best_f_score = 0.0;
    double sec_accuracy = 0.0;
    double sec_f_score = 0.0;

    double epsilon = 0.0;
    bool feasible = false;
    int integration_iterations = 0;
    double integration_gap = 0.0;
    SecurityReport security;

    friend bool operator==(const RepetitionRecord&, const RepetitionRecord&) = default;
};

struct MethodSummary {
    std::string method;
    Summary accuracy;
    Summary f_score;
    std::optional<TTestResult> accuracy_vs_best;  // absent for Best or < 2 repetitions
    std::optional<TTestResult> f_score_vs_best;
};

struct ExperimentReport {
    static constexpr int kSchemaVersion = 1;

    int schema_version = kSchemaVersion;
    std::string name;
    std::uint64_t seed = 0;
    double train_fraction = 0.0;
    int planned_repetitions = 0;
    Index samples = 0;
    Index classes = 0;
    Index view1_dim = 0;
    Index view2_dim = 0;
    std::vector<std::string> baseline_ids;
    std::vector<RepetitionRecord> repetitions;
    std::vector<MethodSummary> methods;  // Best, adapted..., SEC
    int secure_repetitions = 0;
    int certified_repetitions = 0;
    int feasible_repetitions = 0;

    bool all_completed() const;
    std::vector<std::string> method_names() const;
};

struct ExperimentTimings {
    double total_seconds = 0.0;
    std::vector<double> repetition_seconds;
};

struct ExperimentOutcome {
    ExperimentReport report;
    ExperimentTimings timings;
};

/// Per-method scores of one repetition, in method_names() order.
std::vector<MethodScores> repetition_scores(const ExperimentReport& report, const RepetitionRecord& rep);

/// Recomputes methods and the security tallies from the repetition rows.
void aggregate(ExperimentReport& report);

ExperimentOutcome run_experiment(const ExperimentConfig& config);

/// Writes report.json, timings.json, report.txt and scores.csv into dir.
void emit_report(const ExperimentReport& report, const ExperimentTimings& timings, const std::string& dir);

std::string render_text_report(const ExperimentReport& report);

}  // namespace sec
