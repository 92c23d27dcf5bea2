#include "sec/adaptation.hpp"
#include "sec/baselines.hpp"
#include "sec/csv.hpp"
#include "sec/evaluation.hpp"
#include "sec/experiment.hpp"
#include "sec/integration.hpp"
#include "sec/pca.hpp"
#include "sec/security.hpp"
#include "sec/serialize.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using namespace sec;

std::vector<LabelMatrix> read_label_files(const std::vector<std::string>& paths, CsvOptions csv) {
    std::vector<LabelMatrix> out;
    for (const auto& p : paths) out.push_back(read_label_matrix_csv(p, csv));
    return out;
}

KernelSpec make_kernel(const std::string& family, double gamma) {
    KernelSpec k;
    k.family = parse_kernel_family(family);
    k.gamma = gamma;
    k.validate();
    return k;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adapt view-1 classifiers to a newly available feature view and "
                 "integrate them."};
    app.require_subcommand(1);
    bool header = false;
    app.add_flag("--header", header, "CSV inputs start with a header row");

    // adapt
    auto* adapt = app.add_subcommand("adapt", "Adapt one baseline's decision values with view-2 features");
    std::string a_decisions, a_labels, a_view2, a_model, a_test_decisions, a_test_view2, a_predictions;
    std::string a_kernel = "linear", a_lambda = "auto";
    double a_gamma = 0.0;
    std::optional<Index> a_classes;
    int a_iters = 50;
    adapt->add_option("--decisions", a_decisions, "Training decision values, N x c")->required()->check(CLI::ExistingFile);
    adapt->add_option("--labels", a_labels, "Training class ids 0..c-1")->required()->check(CLI::ExistingFile);
    adapt->add_option("--view2", a_view2, "Training view-2 features, N x d2")->required()->check(CLI::ExistingFile);
    adapt->add_option("--classes", a_classes, "Number of classes (default: max id + 1)");
    adapt->add_option("--kernel", a_kernel, "linear or rbf")->check(CLI::IsMember({"linear", "rbf"}));
    adapt->add_option("--gamma", a_gamma, "rbf width");
    adapt->add_option("--lambda", a_lambda, "Regularizer weight, or 'auto' for 5-fold cross-validation");
    adapt->add_option("--max-iterations", a_iters, "Iteration cap");
    adapt->add_option("--model", a_model, "Write the adapted model as JSON");
    adapt->add_option("--test-decisions", a_test_decisions, "Test decision values, t x c")->check(CLI::ExistingFile);
    adapt->add_option("--test-view2", a_test_view2, "Test view-2 features, t x d2")->check(CLI::ExistingFile);
    adapt->add_option("--predictions", a_predictions, "Write adapted test decision values, t x c");

    // integrate
    auto* integ = app.add_subcommand("integrate", "Integrate baseline and adapted test labels");
    std::vector<std::string> i_baselines, i_adapted;
    std::string i_output, i_soft, i_json, i_method = "dual";
    double i_tol = 1e-6;
    int i_max_iters = 10000;
    integ->add_option("--baseline", i_baselines, "Baseline label matrix CSV (t x c, 0/1); repeatable")
        ->required()->check(CLI::ExistingFile);
    integ->add_option("--adapted", i_adapted, "Adapted label matrix CSV (t x c, 0/1); repeatable")
        ->required()->check(CLI::ExistingFile);
    integ->add_option("--output", i_output, "Hardened labels CSV")->required();
    integ->add_option("--soft", i_soft, "Soft label matrix CSV");
    integ->add_option("--json", i_json, "Solution JSON");
    integ->add_option("--method", i_method, "dual or primal_subgradient")
        ->check(CLI::IsMember({"dual", "primal_subgradient"}));
    integ->add_option("--tol", i_tol, "Duality-gap tolerance");
    integ->add_option("--max-iters", i_max_iters, "Iteration cap");

    // run
    auto* run = app.add_subcommand("run", "Run a full experiment from a config file");
    std::string r_config, r_output;
    std::uint64_t r_seed = 0;
    std::optional<int> r_jobs, r_reps;
    run->add_option("--config", r_config, "INI experiment config")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", r_seed, "Master seed for the random splits")->required();
    run->add_option("--jobs", r_jobs, "Worker threads");
    run->add_option("--repetitions", r_reps, "Override the number of repetitions");
    run->add_option("--output", r_output, "Override the output directory");

    // check-security
    auto* check = app.add_subcommand("check-security", "Security diagnostics against known ground truth");
    std::vector<std::string> c_baselines, c_adapted;
    std::string c_integrated, c_truth, c_json;
    check->add_option("--baseline", c_baselines, "Baseline label matrix CSV; repeatable")
        ->required()->check(CLI::ExistingFile);
    check->add_option("--adapted", c_adapted, "Adapted label matrix CSV; repeatable")
        ->required()->check(CLI::ExistingFile);
    check->add_option("--integrated", c_integrated, "Integrated label matrix CSV")->required()->check(CLI::ExistingFile);
    check->add_option("--truth", c_truth, "Ground-truth label matrix CSV")->required()->check(CLI::ExistingFile);
    check->add_option("--json", c_json, "Write the report as JSON");

    // pca
    auto* pca = app.add_subcommand("pca", "Project features onto their leading principal components");
    std::string p_input, p_output, p_apply;
    Index p_dim = 0;
    pca->add_option("--input", p_input, "Features to fit on, N x d")->required()->check(CLI::ExistingFile);
    pca->add_option("--dim", p_dim, "Target dimension")->required();
    pca->add_option("--output", p_output, "Reduced features, N x dim")->required();
    pca->add_option("--apply", p_apply, "Also project this file with the fitted basis (writes <output>.apply.csv)")
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);
    const CsvOptions csv{header};

    try {
        if (*adapt) {
            const auto Y = load_labels_csv(a_labels, a_classes, csv);
            const DecisionMatrix F{read_csv_matrix(a_decisions, csv).transpose(), a_decisions};
            auto X2 = std::make_shared<const Matrix>(load_view_csv(a_view2, csv));
            const auto kernel = make_kernel(a_kernel, a_gamma);
            AdaptationOptions opts;
            opts.max_iterations = a_iters;
            double lambda = 0.0;
            if (a_lambda == "auto") {
                const auto cv = cross_validate_lambda(F, Y, *X2, kernel, default_lambda_grid(), 5, opts);
                lambda = cv.lambda;
            } else {
                lambda = std::stod(a_lambda);
            }
            const auto result = adapt_classifier(F, Y, X2, kernel, lambda, opts);
            std::cout << "lambda " << lambda << ", lambda1 " << result.model.lambda1 << ", lambda2 "
                      << result.model.lambda2 << ", iterations " << result.trace.iterations
                      << (result.trace.converged ? " (converged)" : "") << ", objective "
                      << result.trace.objective.back() << "\n";
            if (result.warning) std::cerr << "warning: " << *result.warning << "\n";
            if (!a_model.empty()) write_json_file(a_model, Json(result.model));
            if (!a_predictions.empty()) {
                if (a_test_decisions.empty() || a_test_view2.empty())
                    throw InputError("--predictions needs --test-decisions and --test-view2");
                const DecisionMatrix F_te{read_csv_matrix(a_test_decisions, csv).transpose(), a_test_decisions};
                write_predictions(a_predictions, predict_adapted(result.model, F_te, load_view_csv(a_test_view2, csv)));
            }
            return 0;
        }

        if (*integ) {
            IntegrationOptions opts;
            opts.tol = i_tol;
            opts.max_iters = i_max_iters;
            opts.method = parse_integration_method(i_method);
            const auto sol = integrate(read_label_files(i_baselines, csv), read_label_files(i_adapted, csv), opts);
            write_label_matrix_csv(i_output, sol.Y_hard.values());
            if (!i_soft.empty()) write_label_matrix_csv(i_soft, sol.Y_soft);
            if (!i_json.empty()) write_json_file(i_json, Json(sol));
            std::cout << "epsilon " << sol.epsilon << (sol.feasible ? " (feasible)" : " (infeasible)")
                      << ", iterations " << sol.iterations << ", gap " << sol.gap << "\n";
            if (sol.warning) std::cerr << "warning: " << *sol.warning << "\n";
            return 0;
        }

        if (*run) {
            auto cfg = load_config(r_config);
            cfg.split.seed = r_seed;
            if (r_jobs) cfg.jobs = *r_jobs;
            if (r_reps) cfg.split.repetitions = *r_reps;
            if (!r_output.empty()) cfg.output_dir = r_output;
            if (cfg.output_dir.empty()) throw InputError("no output directory: set [output] dir or --output");
            const auto outcome = run_experiment(cfg);
            emit_report(outcome.report, outcome.timings, cfg.output_dir);
            std::cout << render_text_report(outcome.report);
            std::cout << "\nwrote " << cfg.output_dir << " in " << outcome.timings.total_seconds << " s\n";
            return outcome.report.all_completed() ? 0 : 2;
        }

        if (*check) {
            const auto hat = read_label_files(c_baselines, csv);
            const auto bar = read_label_files(c_adapted, csv);
            const auto Y = read_label_matrix_csv(c_integrated, csv);
            const auto truth = read_label_matrix_csv(c_truth, csv);
            const auto report = security_report(hat, bar, Y, truth);
            std::printf("%-20s %-20s %-10s %-10s %-14s %-8s\n", "min_j |Yj - Y*|^2", "|Y - Y*|^2", "Best",
                        "SEC", "max count / m", "secure");
            std::printf("%-20.4f %-20.4f %-10.4f %-10.4f %-14s %-8s\n", report.distances.best_distance,
                        report.distances.integrated_distance, report.distances.best_accuracy,
                        report.distances.integrated_accuracy,
                        (std::to_string(report.max_count) + " / " + std::to_string(report.baselines)).c_str(),
                        report.secure ? "yes" : "no");
            if (!c_json.empty()) write_json_file(c_json, Json(report));
            return report.secure ? 0 : 3;
        }

        if (*pca) {
            const Matrix X = load_view_csv(p_input, csv);
            const auto model = fit_pca(X, p_dim);
            write_csv_matrix(p_output, pca_transform(model, X).transpose());
            if (!p_apply.empty())
                write_csv_matrix(p_output + ".apply.csv", pca_transform(model, load_view_csv(p_apply, csv)).transpose());
            std::cout << "captured variance ratio " << model.captured_variance_ratio << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
